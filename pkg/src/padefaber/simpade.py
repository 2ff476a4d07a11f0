"""Simultaneous Padé-Faber approximants.

For a vector ``F = (F_1, .., F_d)``, a multi-index ``m`` and ``n >= max m_a``
we look for a polynomial ``Q`` with ``deg Q <= |m|`` such that the Faber
coefficients ``[Q F_a]_k`` vanish for ``k = n - m_a + 1 .. n`` and every
``a``.  Writing ``Q = sum_j q_j z^j`` this is a homogeneous linear system of
``|m|`` equations in ``|m| + 1`` unknowns whose entries are ``[z^j F_a]_k``.
The numerators are then the Faber sections
``P_a = sum_{k <= n - m_a} [Q F_a]_k Phi_k``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from padefaber.ddarith import stack
from padefaber.errors import PoleEvaluationError
from padefaber.faber import (
    faber_basis,
    faber_values,
    level_curve_nodes_dd,
    level_curve_nodes_mp,
    resolve_engine,
    trapezoid_coefficients,
)
from padefaber.functions import VectorFunctionSpec
from padefaber.geometry import Geometry, level_curve_nodes, phi_abs
from padefaber.polynomial import ComplexPolynomial, native_roots, polynomial_roots

LOGGER = logging.getLogger(__name__)

LEVEL_TIE_TOL = 1e-12
ORIGIN_ROOT_TOL = 1e-10


@dataclass(frozen=True)
class MultiIndex:
    m: tuple

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        if not m:
            raise ValueError("multi-index needs at least one entry")
        if any(v < 0 for v in m):
            raise ValueError(f"multi-index entries must be nonnegative, got {m}")
        if sum(m) == 0:
            raise ValueError("multi-index must not be zero (m in N^d minus {0})")
        object.__setattr__(self, "m", m)

    @property
    def total(self) -> int:
        return sum(self.m)

    @property
    def d(self) -> int:
        return len(self.m)

    def __iter__(self):
        return iter(self.m)

    def __getitem__(self, alpha):
        return self.m[alpha]


@dataclass(frozen=True)
class Tolerances:
    defect: float = 1e-9
    root: float = 1e-10
    degeneracy_ratio: float = 1e6
    absolute_floor: float = 1e-12
    residual_buffer: int = 8


@dataclass(frozen=True)
class Quadrature:
    """Trapezoidal quadrature settings on ``Gamma_rho``.

    ``rho=None`` means "choose from the ground truth" (see :func:`default_rho`);
    ``dps`` switches the coefficient, SVD and root computations to extended
    precision, with ``engine`` selecting how coefficients are sampled (see
    :func:`padefaber.faber.resolve_engine`).
    """

    rho: Optional[float] = None
    N: int = 4096
    dps: Optional[int] = None
    engine: str = "auto"

    def __post_init__(self):
        resolve_engine(self.dps, self.engine)

    @property
    def kind(self) -> str:
        return resolve_engine(self.dps, self.engine)

    def resolve(self, F: VectorFunctionSpec) -> "Quadrature":
        if self.rho is not None:
            return self
        return Quadrature(default_rho(F), self.N, self.dps, self.engine)


def default_rho(F: VectorFunctionSpec) -> float:
    """Geometric mean of 1 and the smallest ``|Phi(pole)|`` of ``F``."""
    poles = F.all_poles()
    if not poles:
        raise ValueError("no poles to choose rho from; pass an explicit rho")
    return math.sqrt(min(phi_abs(F.geometry, lam) for lam in poles))


@dataclass(frozen=True)
class PoleProfile:
    poles: tuple          # ((lambda_j, tau_j), ...) inside D_{rho_m}
    rho_m: float          # math.inf when F has at most |m| poles overall
    L: float
    Q_true: ComplexPolynomial
    levels: tuple         # |Phi(lambda_j)| for the inside poles

    @property
    def multiplicity(self) -> int:
        return sum(t for _, t in self.poles)

    @property
    def max_level(self) -> float:
        return max(self.levels) if self.levels else 1.0


def pole_profile(F: VectorFunctionSpec, m: MultiIndex) -> PoleProfile:
    """Poles of ``F`` in the largest canonical domain holding at most ``|m|`` of them.

    Poles are ranked by ``|Phi(lambda)|`` with their vector orders; poles on
    a common level curve enter or leave together since ``D_rho`` is open.
    """
    vp = F.vector_poles()
    if not vp:
        raise ValueError("pole_profile needs a function with at least one pole")
    g = F.geometry
    ranked = sorted(((phi_abs(g, lam), lam, tau) for lam, tau in vp), key=lambda x: (x[0], x[1].real, x[1].imag))
    groups: list = []
    for level, lam, tau in ranked:
        if groups and abs(level - groups[-1][0]) <= LEVEL_TIE_TOL * level:
            groups[-1][1].append((lam, tau))
        else:
            groups.append([level, [(lam, tau)]])
    inside: list = []
    rho_m = math.inf
    count = 0
    for level, members in groups:
        count += sum(t for _, t in members)
        if count > m.total:
            rho_m = level
            break
        inside.extend(members)
    levels = tuple(phi_abs(g, lam) for lam, _ in inside)
    if inside:
        L = (1.0 + min(levels)) / 2
    else:
        L = (1.0 + rho_m) / 2
    roots = [lam for lam, tau in inside for _ in range(tau)]
    Q_true = normalized_from_roots(roots, L, g)
    return PoleProfile(tuple(inside), rho_m, L, Q_true, levels)


def normalized_from_roots(roots, L: float, g: Geometry) -> ComplexPolynomial:
    """Product of ``(z - r)`` for ``|Phi(r)| <= L`` and ``(1 - z/r)`` otherwise."""
    coeffs = np.array([1.0 + 0j])
    for r in roots:
        r = complex(r)
        if abs(r) < ORIGIN_ROOT_TOL or phi_abs(g, r) <= L:
            factor = [-r, 1.0]
        else:
            factor = [1.0, -1.0 / r]
        coeffs = np.convolve(coeffs, factor)
    return ComplexPolynomial(coeffs)


class CoefficientTable:
    """``[z^j F_a]_k`` for ``j = 0..degree`` and ``k = 0..k_max``, per component.

    The table does not depend on ``n``, so one table serves a whole row
    sequence.  Entries are complex128, or ``mpmath.mpc`` objects when the
    quadrature carries ``dps``.
    """

    def __init__(self, F: VectorFunctionSpec, quad: Quadrature, degree: int, k_max: int):
        quad = quad.resolve(F)
        if not quad.rho > 1:
            raise ValueError(f"rho must exceed 1, got {quad.rho}")
        if quad.N < 2 * (k_max + 1):
            raise ValueError(f"N = {quad.N} too small for k_max = {k_max}")
        self.F = F
        self.quad = quad
        self.degree = degree
        self.k_max = k_max
        self.tables = [self._component(alpha) for alpha in range(F.d)]

    @property
    def extended(self) -> bool:
        return self.quad.dps is not None

    def _component(self, alpha: int) -> np.ndarray:
        F, quad = self.F, self.quad
        g = F.geometry
        if quad.dps is None:
            t, _ = level_curve_nodes(g, quad.rho, quad.N)
            base = np.asarray(F[alpha](t), dtype=complex)
            _require_finite(base, alpha)
            rows = [trapezoid_coefficients(base * t**j, quad.rho, self.k_max) for j in range(self.degree + 1)]
            return np.array(rows)
        if quad.kind == "dd":
            t, _ = level_curve_nodes_dd(g, quad.rho, quad.N)
            base = F[alpha](t)
            if not (np.all(np.isfinite(base.rh)) and np.all(np.isfinite(base.ih))):
                raise ValueError(f"component {alpha} not finite on the quadrature contour")
            samples = [base]
            for _ in range(self.degree):
                samples.append(samples[-1] * t)
            return trapezoid_coefficients(stack(samples), quad.rho, self.k_max, quad.dps)
        with mpmath.workdps(quad.dps):
            t, _ = level_curve_nodes_mp(g, quad.rho, quad.N, quad.dps)
            base = np.asarray(F[alpha](t), dtype=object)
            if not all(mpmath.isfinite(v) for v in base):
                raise ValueError(f"component {alpha} not finite on the quadrature contour")
            out = np.empty((self.degree + 1, self.k_max + 1), dtype=object)
            samples = base
            for j in range(self.degree + 1):
                out[j] = trapezoid_coefficients(samples, quad.rho, self.k_max, quad.dps)
                samples = samples * t
            return out

    def entries(self, alpha: int, j: int, k: int):
        return self.tables[alpha][j, k]

    def apply(self, alpha: int, q, k_stop: int):
        """``[Q F_a]_k`` for ``k = 0..k_stop`` given power coefficients ``q``."""
        tab = self.tables[alpha][:, : k_stop + 1]
        q = np.asarray(q)
        if self.extended:
            with mpmath.workdps(self.quad.dps):
                qq = np.array([mpmath.mpc(complex(v)) if not isinstance(v, mpmath.mpc) else v for v in q], dtype=object)
                out = qq @ tab[: len(qq)]
            return out
        return np.asarray(q, dtype=complex) @ tab[: len(q)]


def _require_finite(values, alpha):
    if not np.all(np.isfinite(values)):
        i = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ValueError(f"component {alpha} not finite at quadrature node {i}")


def defect_matrix(F: VectorFunctionSpec, n: int, m: MultiIndex, quad: Quadrature = Quadrature(),
                  table: Optional[CoefficientTable] = None) -> np.ndarray:
    """``|m| x (|m|+1)`` matrix with rows ``(a, k)``, ``k = n-m_a+1..n``, and entries ``[z^j F_a]_k``."""
    if n < max(m):
        raise ValueError(f"n = {n} must be at least max(m) = {max(m)}")
    if table is None:
        table = CoefficientTable(F, quad, m.total, n)
    rows = []
    for alpha, ma in enumerate(m):
        for k in range(n - ma + 1, n + 1):
            rows.append(table.tables[alpha][: m.total + 1, k])
    return np.array(rows)


@dataclass(frozen=True)
class DenominatorSolution:
    q: np.ndarray
    sigma_min: float
    sigma_second: float
    unique: bool


def solve_denominator(M: np.ndarray, degeneracy_ratio: float = 1e6, absolute_floor: float = 1e-12,
                      dps: Optional[int] = None) -> DenominatorSolution:
    """Null direction of the defect matrix.

    Rows are scaled to unit norm first (this leaves the null space alone but
    makes singular values comparable across ``n``).  The singular values are
    padded with zeros to length ``|m| + 1``; ``q`` is the right singular
    vector of the smallest one, ``sigma_second`` is the next one and
    ``sigma_min = ||M q||``.  ``q`` has unit norm and its largest entry is
    made real positive.
    """
    M = np.asarray(M)
    rows, cols = M.shape
    if cols != rows + 1:
        raise ValueError(f"defect matrix must be |m| x (|m|+1), got {M.shape}")
    if M.dtype == object or dps is not None:
        return _solve_denominator_mp(M, degeneracy_ratio, absolute_floor, dps)
    norms = np.linalg.norm(M, axis=1)
    Mn = M / np.where(norms > 0, norms, 1.0)[:, None]
    _, s, vh = np.linalg.svd(Mn, full_matrices=True)
    q = vh[-1].conj()
    q = _fix_phase(q)
    s_full = np.zeros(cols)
    s_full[: len(s)] = s
    sigma_second = float(s_full[-2])
    sigma_min = float(np.linalg.norm(Mn @ q))
    unique = sigma_second > degeneracy_ratio * sigma_min + absolute_floor
    return DenominatorSolution(q, sigma_min, sigma_second, bool(unique))


def _solve_denominator_mp(M, degeneracy_ratio, absolute_floor, dps):
    dps = dps or mpmath.mp.dps
    rows, cols = M.shape
    with mpmath.workdps(dps):
        A = mpmath.matrix(rows, cols)
        for i in range(rows):
            vals = [mpmath.mpc(M[i, j]) for j in range(cols)]
            nrm = mpmath.sqrt(mpmath.fsum(abs(v) ** 2 for v in vals))
            for j in range(cols):
                A[i, j] = vals[j] / nrm if nrm != 0 else vals[j]
        _, S, V = mpmath.svd_c(A, full_matrices=True)
        s = sorted((S[i] for i in range(len(S))), reverse=True)
        s_full = s + [mpmath.mpf(0)] * (cols - len(s))
        q = np.array([mpmath.conj(V[cols - 1, j]) for j in range(cols)], dtype=object)
        q = _fix_phase(q)
        sigma_min = float(mpmath.norm(A * mpmath.matrix(q.tolist()))) if rows else 0.0
        sigma_second = float(s_full[-2])
    unique = sigma_second > degeneracy_ratio * sigma_min + absolute_floor
    return DenominatorSolution(q, sigma_min, sigma_second, bool(unique))


def _fix_phase(q):
    mags = [abs(v) for v in q]
    i = int(np.argmax([float(v) for v in mags]))
    lead = q[i]
    if lead == 0:
        return q
    return q * (abs(lead) / lead)


def normalize_denominator(Q_raw: ComplexPolynomial, L: float, g: Geometry, root_tol: float = 1e-10) -> ComplexPolynomial:
    """Rescale ``Q_raw`` so that ``Q = prod_{|Phi(r)|<=L} (z - r) prod_{|Phi(r)|>L} (1 - z/r)``.

    A root closer than ``1e-10`` to the origin always gets the monic factor.
    """
    if Q_raw.is_zero:
        raise ValueError("cannot normalize the zero polynomial")
    if not L > 0.5:
        raise ValueError(f"L must exceed 1/2, got {L}")
    if Q_raw.degree == 0:
        return ComplexPolynomial(np.array([1.0 + 0j]))
    # Rescale rather than rebuild from the roots: the leading coefficient and
    # the product of the outer roots stay accurate for clustered roots.
    roots = native_roots(Q_raw, root_tol)
    scale = 1 / Q_raw.coeffs[-1]
    for r in roots:
        rc = complex(r)
        if abs(rc) >= ORIGIN_ROOT_TOL and phi_abs(g, rc) > L:
            scale = scale * (-1 / r)
    return ComplexPolynomial(np.array([complex(c * scale) for c in Q_raw.coeffs]))


def _trim_small_leading(q: np.ndarray, extended: bool, dps: Optional[int]) -> ComplexPolynomial:
    mags = [float(abs(v)) for v in q]
    scale = max(mags)
    tol = 10.0 ** (-(dps - 4)) if extended else 64 * np.finfo(float).eps
    keep = len(q)
    while keep > 1 and mags[keep - 1] <= tol * scale:
        keep -= 1
    return ComplexPolynomial(q[:keep])


@dataclass(frozen=True, eq=False)
class ApproximantResult:
    """One ``(n, m)`` simultaneous Padé-Faber approximant with diagnostics.

    ``P_faber[a]`` holds the Faber coefficients of ``P_a`` (indices
    ``0..n-m_a``); ``residuals[a]`` holds ``[Q F_a]_k`` for
    ``k = n-m_a+1 .. n+W``, starting at ``residual_start[a]``.
    """

    n: int
    m: MultiIndex
    geometry: Geometry
    Q: ComplexPolynomial
    roots: np.ndarray
    P_faber: tuple
    residuals: tuple
    residual_start: tuple
    sigma_min: float
    sigma_second: float
    unique: bool
    defect_ok: bool
    defect_ratio: float
    normalized: bool
    _P_cache: dict = field(default_factory=dict, repr=False)

    @property
    def P(self) -> list:
        """Numerators in the power basis (ill-conditioned for large ``n`` on segments)."""
        if "P" not in self._P_cache:
            basis = faber_basis(self.geometry, max(len(c) for c in self.P_faber) - 1)
            polys = []
            for coef in self.P_faber:
                acc = np.zeros(len(coef), dtype=complex)
                for k, ck in enumerate(coef):
                    acc[: k + 1] += ck * basis[k].coeffs
                polys.append(ComplexPolynomial(acc))
            self._P_cache["P"] = polys
        return self._P_cache["P"]

    def window_residuals(self, alpha: int) -> np.ndarray:
        """The defect coefficients ``a_{k,n}`` for ``k = n-m_a+1..n`` (should vanish)."""
        return self.residuals[alpha][: self.m[alpha]]

    def numerator(self, alpha: int, z):
        coef = self.P_faber[alpha]
        vals = faber_values(self.geometry, z, len(coef) - 1)
        return np.tensordot(coef, vals, axes=(0, 0))

    def evaluate(self, alpha: int, z):
        return evaluate_approximant(self, alpha, z)


def numerators(F: VectorFunctionSpec, Q: ComplexPolynomial, n: int, m: MultiIndex,
               quad: Quadrature = Quadrature(), table: Optional[CoefficientTable] = None,
               buffer: int = 8):
    """Faber coefficients of the numerators and the residual coefficients.

    Returns ``(P_faber, residuals)`` where ``P_faber[a] = [Q F_a]_{0..n-m_a}``
    and ``residuals[a] = [Q F_a]_{n-m_a+1..n+buffer}``.
    """
    if n < max(m):
        raise ValueError(f"n = {n} must be at least max(m) = {max(m)}")
    if table is None:
        table = CoefficientTable(F, quad, max(m.total, Q.degree), n + buffer)
    if Q.degree > table.degree:
        raise ValueError("denominator degree exceeds the coefficient table")
    P, R = [], []
    for alpha, ma in enumerate(m):
        qf = table.apply(alpha, Q.coeffs, n + buffer)
        qf = np.array([complex(v) for v in qf]) if qf.dtype == object else qf
        P.append(qf[: n - ma + 1])
        R.append(qf[n - ma + 1:])
    return tuple(P), tuple(R)


def simultaneous_pade_faber(F: VectorFunctionSpec, m: MultiIndex, n: int,
                            quad: Quadrature = Quadrature(),
                            profile: Optional[PoleProfile] = None,
                            table: Optional[CoefficientTable] = None,
                            tol: Tolerances = Tolerances()) -> ApproximantResult:
    """Compute the ``(n, m)`` approximant.

    With a ``profile`` the denominator is normalized by its roots against the
    threshold ``L``; without one it keeps unit Euclidean norm.
    """
    if m.d != F.d:
        raise ValueError(f"multi-index has {m.d} entries but F has {F.d} components")
    W = tol.residual_buffer
    if table is None:
        table = CoefficientTable(F, quad, m.total, n + W)
    M = defect_matrix(F, n, m, table=table)
    sol = solve_denominator(M, tol.degeneracy_ratio, tol.absolute_floor, dps=table.quad.dps)
    if table.extended:
        with mpmath.workdps(table.quad.dps):
            Q_raw = _trim_small_leading(sol.q, True, table.quad.dps)
            if profile is not None:
                Q = normalize_denominator(Q_raw, profile.L, F.geometry, tol.root)
            else:
                Q = Q_raw.to_complex()
    else:
        Q_raw = _trim_small_leading(sol.q, False, None)
        Q = normalize_denominator(Q_raw, profile.L, F.geometry, tol.root) if profile is not None else Q_raw
    roots = _roots_of(Q, tol.root)
    P, R = numerators(F, Q, n, m, table=table, buffer=W)
    ratio = 0.0
    for alpha, ma in enumerate(m):
        if ma == 0:
            continue
        scale = max(np.max(np.abs(P[alpha])) if len(P[alpha]) else 0.0, np.max(np.abs(R[alpha])))
        window = np.max(np.abs(R[alpha][:ma]))
        ratio = max(ratio, window / scale if scale > 0 else 0.0)
    return ApproximantResult(
        n=n, m=m, geometry=F.geometry, Q=Q, roots=roots, P_faber=P, residuals=R,
        residual_start=tuple(n - ma + 1 for ma in m),
        sigma_min=sol.sigma_min, sigma_second=sol.sigma_second, unique=sol.unique,
        defect_ok=bool(ratio <= tol.defect), defect_ratio=float(ratio),
        normalized=profile is not None,
    )


def _roots_of(Q: ComplexPolynomial, tol: float) -> np.ndarray:
    if Q.degree < 1:
        return np.zeros(0, dtype=complex)
    return polynomial_roots(Q, tol)


def evaluate_approximant(res: ApproximantResult, alpha: int, z):
    """``R_a(z) = P_a(z) / Q(z)``.

    Raises
    ------
    PoleEvaluationError
        If ``z`` is (numerically) a zero of ``Q``.
    """
    zz = np.asarray(z, dtype=complex)
    qv = np.asarray(res.Q(zz), dtype=complex)
    scale = np.zeros(zz.shape)
    for j, c in enumerate(res.Q.coeffs):
        scale = scale + abs(complex(c)) * np.abs(zz) ** j
    bad = np.abs(qv) <= 64 * np.finfo(float).eps * scale
    if np.any(bad):
        first = complex(zz[bad].ravel()[0]) if zz.ndim else complex(zz)
        raise PoleEvaluationError(f"denominator vanishes at z = {first}")
    out = res.numerator(alpha, zz) / qv
    return complex(out) if np.ndim(z) == 0 else out


def multi_index(values: Sequence[int]) -> MultiIndex:
    return MultiIndex(tuple(values))
