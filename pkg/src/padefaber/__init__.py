"""Simultaneous Padé-Faber approximants on sets with explicit exterior maps."""

from padefaber.analysis import (
    CompactGrid,
    RowSequenceReport,
    delta_matrix,
    fit_rate,
    make_grid,
    match_poles,
    polewise_independence_delta,
    run_row_sequence,
    theoretical_bounds,
)
from padefaber.faber import estimate_rho0, evaluate_faber_series, faber_basis, faber_coefficients, faber_values
from padefaber.functions import PrincipalPart, ScalarFunction, VectorFunctionSpec, simple_poles
from padefaber.geometry import Geometry, disk, ellipse, phi, psi, segment
from padefaber.polynomial import ComplexPolynomial, polynomial_roots
from padefaber.simpade import (
    MultiIndex,
    Quadrature,
    Tolerances,
    defect_matrix,
    evaluate_approximant,
    pole_profile,
    simultaneous_pade_faber,
    solve_denominator,
)

__version__ = "0.1.0"

__all__ = [
    "CompactGrid", "ComplexPolynomial", "Geometry", "MultiIndex", "PrincipalPart", "Quadrature",
    "RowSequenceReport", "ScalarFunction", "Tolerances", "VectorFunctionSpec", "defect_matrix",
    "delta_matrix", "disk", "ellipse", "estimate_rho0", "evaluate_approximant", "evaluate_faber_series",
    "faber_basis", "faber_coefficients", "faber_values", "fit_rate", "make_grid", "match_poles", "phi",
    "pole_profile", "polewise_independence_delta", "polynomial_roots", "psi", "run_row_sequence", "segment",
    "simple_poles", "simultaneous_pade_faber", "solve_denominator", "theoretical_bounds",
]
