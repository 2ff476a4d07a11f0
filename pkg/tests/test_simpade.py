from fractions import Fraction

import numpy as np
import pytest

from oracles import fraction_null_vector, toeplitz_pade_denominator
from padefaber.errors import PoleEvaluationError
from padefaber.functions import PrincipalPart, ScalarFunction, VectorFunctionSpec, simple_poles
from padefaber.geometry import disk, ellipse, segment
from padefaber.polynomial import ComplexPolynomial
from padefaber.simpade import (
    CoefficientTable,
    MultiIndex,
    Quadrature,
    Tolerances,
    default_rho,
    defect_matrix,
    evaluate_approximant,
    multi_index,
    normalize_denominator,
    numerators,
    pole_profile,
    simultaneous_pade_faber,
    solve_denominator,
)


DISK_F = VectorFunctionSpec((simple_poles(2), simple_poles(3)), disk())


def test_multi_index_validation():
    assert MultiIndex((1, 2)).total == 3
    with pytest.raises(ValueError):
        MultiIndex((0, 0))
    with pytest.raises(ValueError):
        MultiIndex((1, -1))
    with pytest.raises(ValueError):
        MultiIndex(())
    assert multi_index([2]).d == 1


def test_default_rho_is_geometric_mean():
    assert default_rho(DISK_F) == pytest.approx(np.sqrt(2))


def test_pole_profile_segment_example():
    F = VectorFunctionSpec((simple_poles(1.25, 2.125), simple_poles(-1.25)), segment())
    prof = pole_profile(F, MultiIndex((1, 1)))
    assert sorted(p.real for p, _ in prof.poles) == [-1.25, 1.25]
    assert prof.rho_m == pytest.approx(4.0)
    assert prof.L == pytest.approx(1.5)
    assert prof.max_level == pytest.approx(2.0)


def test_pole_profile_ties_leave_together():
    F = VectorFunctionSpec((simple_poles(2, -2, 5),), disk())
    prof = pole_profile(F, MultiIndex((1,)))
    assert prof.poles == () and prof.rho_m == pytest.approx(2.0)
    # no inside poles: threshold falls back to (1 + rho_m) / 2
    assert prof.L == pytest.approx(1.5)
    assert prof.Q_true.degree == 0


def test_pole_profile_infinite_when_few_poles():
    prof = pole_profile(DISK_F, MultiIndex((2, 1)))
    assert prof.rho_m == float("inf")
    assert prof.multiplicity == 2


def test_defect_matrix_hand_solved():
    # rows [z^j F_a]_n on the unit disk: -(1/2)^{n-j+1} and -(1/3)^{n-j+1}
    n = 5
    M = defect_matrix(DISK_F, n, MultiIndex((1, 1)), Quadrature(N=256))
    expect = np.array([[-(0.5 ** (n - j + 1)) for j in range(3)], [-((1 / 3) ** (n - j + 1)) for j in range(3)]])
    np.testing.assert_allclose(M, expect, rtol=1e-12)


def test_exact_recovery_matches_fraction_oracle():
    rows = [[Fraction(1), Fraction(2), Fraction(4)], [Fraction(1), Fraction(3), Fraction(9)]]
    q = fraction_null_vector(rows)          # (6, -5, 1) up to scale
    q = [v / q[0] for v in q]
    prof = pole_profile(DISK_F, MultiIndex((1, 1)))
    for n in (2, 7, 15):
        res = simultaneous_pade_faber(DISK_F, MultiIndex((1, 1)), n, Quadrature(), profile=prof)
        np.testing.assert_allclose(res.Q.coeffs, [float(v) for v in q], atol=1e-10)
        assert res.unique and res.defect_ok
        np.testing.assert_allclose(sorted(res.roots.real), [2, 3], atol=1e-9)


def test_scalar_reduction_against_toeplitz_oracle():
    F = VectorFunctionSpec((simple_poles(2, 6, 9),), disk())
    prof = pole_profile(F, MultiIndex((2,)))
    quad = Quadrature(N=1024, dps=30)
    table = CoefficientTable(F, quad.resolve(F), 2, 20)
    for n in (4, 9, 12):
        oracle = toeplitz_pade_denominator([2, 6, 9], n, 2)
        res = simultaneous_pade_faber(F, MultiIndex((2,)), n, quad, profile=prof, table=table)
        got = res.Q.coeffs / res.Q.coeffs[0]
        np.testing.assert_allclose(got, [float(v) for v in oracle], atol=1e-8)


def test_solve_denominator_degenerate_flag():
    M = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    sol = solve_denominator(M)
    assert not sol.unique
    assert np.linalg.norm(M @ sol.q) < 1e-12
    assert abs(np.linalg.norm(sol.q) - 1) < 1e-12
    lead = sol.q[np.argmax(np.abs(sol.q))]
    assert lead.imag == 0 and lead.real > 0


def test_solve_denominator_shape_check():
    with pytest.raises(ValueError):
        solve_denominator(np.ones((2, 2)))


def test_normalize_denominator_split_factors():
    g = disk()
    raw = ComplexPolynomial(7 * np.convolve([-1.2, 1], [-4, 1]))
    # L = 2: root 1.2 inside gets (z - r), root 4 outside gets (1 - z/r)
    Q = normalize_denominator(raw, 2.0, g)
    np.testing.assert_allclose(Q.coeffs, np.convolve([-1.2, 1], [1, -0.25]), rtol=1e-13)
    with pytest.raises(ValueError):
        normalize_denominator(raw, 0.4, g)
    with pytest.raises(ValueError):
        normalize_denominator(ComplexPolynomial([0.0]), 2.0, g)
    assert normalize_denominator(ComplexPolynomial([3.0]), 2.0, g).coeffs.tolist() == [1]


def test_root_at_origin_gets_monic_factor():
    g = segment(2, 3)
    Q = normalize_denominator(ComplexPolynomial([0, 5.0]), 1.5, g)
    np.testing.assert_allclose(Q.coeffs, [0, 1])


def test_numerators_and_window_residuals():
    F = VectorFunctionSpec((simple_poles(1.25, 2.125), simple_poles(-1.25)), segment())
    m = MultiIndex((1, 1))
    res = simultaneous_pade_faber(F, m, 10, Quadrature(), profile=pole_profile(F, m))
    assert len(res.P_faber[0]) == 10 and len(res.P_faber[1]) == 10
    assert res.defect_ok
    assert np.max(np.abs(res.window_residuals(0))) <= 1e-9 * np.max(np.abs(res.P_faber[0]))
    P, R = numerators(F, res.Q, 10, m, Quadrature().resolve(F))
    np.testing.assert_allclose(P[0], res.P_faber[0])
    # power-basis numerators agree with the Faber-basis evaluation
    z = np.array([0.3, -0.7])
    np.testing.assert_allclose(res.P[0](z), res.numerator(0, z), rtol=1e-9)


def test_evaluate_approximant_and_pole_error():
    F = VectorFunctionSpec((simple_poles(2), simple_poles(3)), disk())
    res = simultaneous_pade_faber(F, MultiIndex((1, 1)), 6, profile=pole_profile(F, MultiIndex((1, 1))))
    assert res.evaluate(0, 0.0) == pytest.approx(-0.5)
    assert evaluate_approximant(res, 1, 0.5) == pytest.approx(1 / (0.5 - 3))
    with pytest.raises(PoleEvaluationError):
        evaluate_approximant(res, 0, complex(res.roots[0]))


def test_unnormalized_solution_has_unit_norm():
    res = simultaneous_pade_faber(DISK_F, MultiIndex((1, 1)), 6)
    assert not res.normalized
    assert np.linalg.norm(res.Q.coeffs) == pytest.approx(1.0)


def test_higher_order_pole_on_ellipse():
    g = ellipse(0, 0.3, 1.0, 2.0)
    F = VectorFunctionSpec((ScalarFunction((PrincipalPart(2 + 1.5j, (0.5, 1.0)),), ComplexPolynomial([1.0])),), g)
    m = MultiIndex((2,))
    prof = pole_profile(F, m)
    res = simultaneous_pade_faber(F, m, 12, Quadrature(N=1024, dps=30), profile=prof)
    np.testing.assert_allclose(res.Q.coeffs, prof.Q_true.coeffs, atol=1e-12)


def test_n_below_max_m_rejected():
    with pytest.raises(ValueError):
        defect_matrix(DISK_F, 1, MultiIndex((2, 1)))
    with pytest.raises(ValueError):
        simultaneous_pade_faber(DISK_F, MultiIndex((1,)), 3)


def test_tolerance_defaults():
    t = Tolerances()
    assert (t.defect, t.root, t.degeneracy_ratio, t.absolute_floor, t.residual_buffer) == (1e-9, 1e-10, 1e6, 1e-12, 8)
