"""Row-sequence experiments and convergence diagnostics.

A row sequence fixes ``m`` and lets ``n`` grow.  For each ``n`` we record the
sup-error of every component on a sample grid ``K``, the coefficient error
of the normalized denominator against the true one, the distance of its
zeros to the true poles and the singular-value diagnostics of the defect
system.  Geometric rates are fitted afterwards and compared with

    ||Phi||_K / rho_m          (sup-error on K)
    max |Phi(lambda)| / rho_m  (denominator coefficients)
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Mapping
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from padefaber.errors import InsufficientDataError, PadeFaberError
from padefaber.functions import VectorFunctionSpec
from padefaber.geometry import Geometry, _psi_raw, boundary_points, distance_to_set, phi, phi_abs, psi
from padefaber.simpade import (
    ApproximantResult,
    CoefficientTable,
    MultiIndex,
    PoleProfile,
    Quadrature,
    Tolerances,
    pole_profile,
    simultaneous_pade_faber,
)

LOGGER = logging.getLogger(__name__)

GRID_KINDS = ("boundary", "level_curve", "band", "disk", "rectangle", "points")
POLE_CLEARANCE = 1e-3
MAX_MATCH = 8


@dataclass(frozen=True, eq=False)
class CompactGrid:
    """Finite sample of a compact set K.

    ``phi_sup`` is ``max(max_K |Phi|, 1)``; for grids inside E it is 1.
    """

    name: str
    kind: str
    points: np.ndarray
    phi_sup: float
    params: dict = field(default_factory=dict)


def make_grid(g: Geometry, kind: str, resolution: int = 256, name: Optional[str] = None,
              seed: Optional[int] = None, **params) -> CompactGrid:
    """Build a sample grid.

    Kinds: ``boundary`` (the boundary of E; by the maximum principle this
    carries the sup over E), ``level_curve`` (``|Phi| = r``), ``band``
    (``1 <= |Phi| <= r``, random when ``seed`` is given), ``disk``
    (``center``, ``radius`` in the z-plane), ``rectangle`` (``x0, x1, y0,
    y1``) and ``points`` (explicit list).
    """
    if kind not in GRID_KINDS:
        raise ValueError(f"unknown grid kind {kind!r}")
    if resolution < 1:
        raise ValueError("grid resolution must be positive")
    name = name or kind
    theta = 2 * np.pi * np.arange(resolution) / resolution
    if kind == "boundary":
        pts = boundary_points(g, resolution)
        return CompactGrid(name, kind, pts, 1.0, {"resolution": resolution})
    if kind == "level_curve":
        r = float(params["r"])
        if r < 1:
            raise ValueError("level_curve needs r >= 1")
        w = r * np.exp(1j * theta)
        pts = boundary_points(g, resolution) if r == 1 else psi(g, w)
    elif kind == "band":
        r = float(params["r"])
        if r <= 1:
            raise ValueError("band needs r > 1")
        if seed is not None:
            rng = np.random.default_rng(seed)
            radii = 1 + (r - 1) * rng.random(resolution)
            angles = 2 * np.pi * rng.random(resolution)
        else:
            n_r = max(2, int(round(math.sqrt(resolution / 8))))
            n_t = max(1, resolution // n_r)
            radii = np.repeat(np.linspace(1, r, n_r), n_t)
            angles = np.tile(2 * np.pi * np.arange(n_t) / n_t, n_r)
        w = radii * np.exp(1j * angles)
        pts = _psi_raw(g, w)
    elif kind == "disk":
        center = complex(params.get("center", 0))
        radius = float(params["radius"])
        n_r = max(1, int(round(math.sqrt(resolution / 8))))
        n_t = max(1, resolution // n_r)
        rings = np.linspace(radius / n_r, radius, n_r)
        pts = (center + rings[:, None] * np.exp(2j * np.pi * np.arange(n_t) / n_t)[None, :]).ravel()
    elif kind == "rectangle":
        x0, x1, y0, y1 = (float(params[k]) for k in ("x0", "x1", "y0", "y1"))
        side = max(2, int(round(math.sqrt(resolution))))
        X, Y = np.meshgrid(np.linspace(x0, x1, side), np.linspace(y0, y1, side))
        pts = (X + 1j * Y).ravel()
    else:
        pts = np.array([complex(*p) if isinstance(p, (list, tuple)) else complex(p) for p in params["points"]])
    pts = np.asarray(pts, dtype=complex)
    phi_sup = max(float(np.max(phi_abs(g, pts))), 1.0)
    return CompactGrid(name, kind, pts, phi_sup, {"resolution": resolution, **params})


def validate_grid(K: CompactGrid, profile: PoleProfile, g: Geometry) -> None:
    """Check ``K`` lies in ``D_{rho_m}`` and stays clear of the captured poles."""
    mods = np.asarray(phi_abs(g, K.points))
    if np.any(mods >= profile.rho_m):
        raise ValueError(f"grid {K.name!r} leaves D_rho with rho = {profile.rho_m}")
    outside = mods > 1
    if np.any(outside):
        w = phi(g, K.points[outside])
        for lam, _ in profile.poles:
            gap = np.min(np.abs(w - phi(g, lam)))
            if gap < POLE_CLEARANCE:
                raise ValueError(f"grid {K.name!r} comes within {gap:.2e} of pole {lam} in the Phi-plane")


class FitResult(NamedTuple):
    rate: float
    window: tuple
    nth_root_max: float


def fit_rate(errors, floor: float = 1e-12, cap: float = 1e-1, ns: Optional[Sequence[int]] = None) -> FitResult:
    """Geometric rate of a sequence ``e_n``.

    ``errors`` is a mapping ``n -> e_n`` or a sequence paired with ``ns``.
    Only entries with ``floor <= e_n <= cap`` are used; the rate is
    ``exp(slope)`` of the least-squares line through ``log e_n``.  The
    secondary estimator ``max e_n^{1/n}`` over the same window is returned
    alongside.

    Raises
    ------
    InsufficientDataError
        If fewer than five entries fall inside ``[floor, cap]``.
    """
    if isinstance(errors, Mapping):
        pairs = sorted(errors.items())
    else:
        errors = list(errors)
        ns = list(range(len(errors))) if ns is None else list(ns)
        if len(ns) != len(errors):
            raise ValueError("ns and errors differ in length")
        pairs = list(zip(ns, errors))
    window = [(n, float(e)) for n, e in pairs if np.isfinite(e) and floor <= e <= cap and e > 0]
    if len(window) < 5:
        raise InsufficientDataError(f"only {len(window)} errors in [{floor:g}, {cap:g}]; need 5")
    x = np.array([n for n, _ in window], dtype=float)
    y = np.log([e for _, e in window])
    slope = np.polyfit(x, y, 1)[0]
    nth = max(e ** (1.0 / n) for n, e in window if n > 0) if any(n > 0 for n, _ in window) else math.nan
    return FitResult(float(np.exp(slope)), tuple(int(n) for n, _ in window), float(nth))


def match_poles(roots, profile: PoleProfile) -> list:
    """Distance from each true pole to the zeros assigned to it.

    The true poles are expanded by multiplicity and assigned to distinct
    roots by minimizing the total absolute distance over all permutations.
    Missing roots are padded with an unmatched sentinel (distance ``inf``).
    Returns, per distinct pole, the largest distance among its roots.
    """
    targets = [(idx, lam) for idx, (lam, tau) in enumerate(profile.poles) for _ in range(tau)]
    roots = [complex(r) for r in roots]
    if len(targets) > MAX_MATCH or len(roots) > MAX_MATCH:
        raise ValueError(f"pole matching is factorial; at most {MAX_MATCH} roots supported")
    if not targets:
        return []
    if len(roots) < len(targets):
        roots = roots + [complex(math.inf, 0)] * (len(targets) - len(roots))
    best_cost, best = math.inf, None
    for perm in itertools.permutations(range(len(roots)), len(targets)):
        cost = 0.0
        for (_, lam), r in zip(targets, perm):
            cost += abs(roots[r] - lam)
        if cost < best_cost or best is None:
            best_cost, best = cost, perm
    out = [0.0] * len(profile.poles)
    for (idx, lam), r in zip(targets, best):
        out[idx] = max(out[idx], abs(roots[r] - lam))
    return out


def _default_delta_eps(F: VectorFunctionSpec, profile: PoleProfile) -> float:
    lams = [lam for lam, _ in profile.poles]
    everything = F.all_poles()
    gaps = [abs(a - b) for i, a in enumerate(everything) for b in everything[i + 1:]]
    eps = min(gaps) / 4 if gaps else math.inf
    for lam in lams:
        eps = min(eps, distance_to_set(F.geometry, lam) / 2)
    return eps


def delta_matrix(F: VectorFunctionSpec, m: MultiIndex, profile: PoleProfile,
                 eps: Optional[float] = None, N: int = 128) -> np.ndarray:
    """The ``|m| x |m|`` polewise-independence matrix.

    Row ``(a, s)``, column ``(j, t)`` holds the ``t``-th derivative at
    ``lambda_j`` of ``(z - lambda_j)^{tau_j} F_a(z) Phi(z)^s``, computed by
    the trapezoidal rule on ``|z - lambda_j| = eps``.  When the captured
    poles have total order below ``|m|`` the missing columns are zero.
    """
    g = F.geometry
    lams = [lam for lam, _ in profile.poles]
    if eps is None:
        eps = _default_delta_eps(F, profile)
    else:
        gaps = [abs(a - b) for i, a in enumerate(lams) for b in lams[i + 1:]]
        if gaps and 2 * eps >= min(gaps):
            raise ValueError(f"Cauchy circles of radius {eps} overlap")
        for lam in F.all_poles():
            if lam not in lams and any(abs(lam - c) <= eps for c in lams):
                raise ValueError(f"Cauchy circle of radius {eps} encloses another pole {lam}")
        for lam in lams:
            if distance_to_set(g, lam) <= eps:
                raise ValueError(f"Cauchy circle of radius {eps} around {lam} meets E")
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError("could not determine a Cauchy circle radius")
    theta = 2 * np.pi * np.arange(N) / N
    unit = np.exp(1j * theta)
    size = m.total
    D = np.zeros((size, size), dtype=complex)
    col = 0
    columns = []
    for lam, tau in profile.poles:
        z = lam + eps * unit
        for t in range(tau):
            columns.append((lam, tau, t, z))
    if len(columns) > size:
        raise ValueError("captured poles exceed |m|; profile is inconsistent")
    row = 0
    for alpha, ma in enumerate(m):
        for s in range(ma):
            for col, (lam, tau, t, z) in enumerate(columns):
                vals = (z - lam) ** tau * F[alpha](z) * phi(g, z) ** s
                D[row, col] = math.factorial(t) * np.mean(vals * (eps * unit) ** (-t))
            row += 1
    return D


def polewise_independence_delta(F: VectorFunctionSpec, m: MultiIndex, profile: PoleProfile,
                                eps: Optional[float] = None, N: int = 128) -> complex:
    """Determinant of :func:`delta_matrix`; zero iff ``F`` is polewise dependent."""
    return complex(np.linalg.det(delta_matrix(F, m, profile, eps, N)))


def delta_relative(D: np.ndarray) -> float:
    """``|det D|`` divided by its Hadamard bound (product of row norms)."""
    scale = float(np.prod(np.linalg.norm(D, axis=1)))
    if scale == 0:
        return 0.0
    return float(abs(np.linalg.det(D)) / scale)


class Bounds(NamedTuple):
    bound_24: float
    bound_25: float
    superlinear: bool


def theoretical_bounds(profile: PoleProfile, K: CompactGrid) -> Bounds:
    """Right-hand sides ``||Phi||_K / rho_m`` and ``max |Phi(lambda)| / rho_m``.

    With ``rho_m = inf`` both are reported as 0 and ``superlinear`` is set.
    """
    if math.isinf(profile.rho_m):
        return Bounds(0.0, 0.0, True)
    return Bounds(K.phi_sup / profile.rho_m, profile.max_level / profile.rho_m, False)


@dataclass
class NRecord:
    n: int
    sup_err: dict          # grid name -> tuple of per-component sup errors
    q_coeff_err: float
    pole_dist: tuple
    sigma_min: float
    sigma_second: float
    unique: bool
    defect_ok: bool
    defect_ratio: float
    roots: tuple
    q_sup: float
    approximant: Optional[ApproximantResult] = field(default=None, repr=False)


@dataclass
class RowSequenceReport:
    m: MultiIndex
    profile: PoleProfile
    quad: Quadrature
    grids: tuple
    records: list
    bounds: dict            # grid name -> Bounds
    r_sup: dict             # grid name -> list (per component) of FitResult | None
    r_Q: Optional[FitResult]
    r_pole: list
    delta: complex
    delta_rel: float
    n1: Optional[int]
    fit_floor: float
    fit_cap: float
    fit_notes: list = field(default_factory=list)

    @property
    def ns(self) -> list:
        return [r.n for r in self.records]

    def q_errors(self) -> dict:
        return {r.n: r.q_coeff_err for r in self.records}

    def sup_errors(self, grid: str, alpha: int) -> dict:
        return {r.n: r.sup_err[grid][alpha] for r in self.records}

    def pole_trend_ok(self) -> list:
        """Per pole: median distance over the second half below that of the first half."""
        out = []
        half = len(self.records) // 2
        for j in range(len(self.profile.poles)):
            d = [r.pole_dist[j] for r in self.records]
            if half == 0:
                out.append(False)
                continue
            out.append(bool(np.median(d[half:]) < np.median(d[:half])))
        return out

    def conformance(self, delta_threshold: float = 1e-3, slack_q: float = 1.1, slack_sup: float = 1.2) -> dict:
        """One-sided comparison of fitted rates with the theoretical bounds."""
        applicable = (not math.isinf(self.profile.rho_m)) and self.delta_rel > delta_threshold
        checks: dict = {"applicable": applicable}
        if not applicable:
            return checks
        b25 = next(iter(self.bounds.values())).bound_25 if self.bounds else math.nan
        checks["r_Q"] = None if self.r_Q is None else bool(self.r_Q.rate <= slack_q * b25)
        for name, fits in self.r_sup.items():
            b24 = self.bounds[name].bound_24
            checks[f"r_sup[{name}]"] = [None if f is None else bool(f.rate <= slack_sup * b24) for f in fits]
        return checks


def _sup_error(F, res, grid, alpha):
    try:
        approx = res.evaluate(alpha, grid.points)
    except PadeFaberError:
        return math.inf
    return float(np.max(np.abs(F[alpha](grid.points) - approx)))


def _coeff_err(Q, Q_true) -> float:
    a, b = Q.coeffs, Q_true.coeffs
    size = max(len(a), len(b))
    a = np.pad(a.astype(complex), (0, size - len(a)))
    b = np.pad(b.astype(complex), (0, size - len(b)))
    return float(np.max(np.abs(a - b)))


def _row_point(F, m, n, profile, table, tol, grids, keep):
    res = simultaneous_pade_faber(F, m, n, profile=profile, table=table, tol=tol)
    sup = {K.name: tuple(_sup_error(F, res, K, a) for a in range(F.d)) for K in grids}
    first = grids[0].points if grids else np.zeros(1)
    return NRecord(
        n=n,
        sup_err=sup,
        q_coeff_err=_coeff_err(res.Q, profile.Q_true),
        pole_dist=tuple(match_poles(res.roots, profile)) if profile.poles else (),
        sigma_min=res.sigma_min,
        sigma_second=res.sigma_second,
        unique=res.unique,
        defect_ok=res.defect_ok,
        defect_ratio=res.defect_ratio,
        roots=tuple(complex(r) for r in res.roots),
        q_sup=float(np.max(np.abs(res.Q(first)))),
        approximant=res if keep else None,
    )


def _row_point_star(args):
    return _row_point(*args)


def _all_small(rec: NRecord, floor: float) -> bool:
    return rec.q_coeff_err <= floor and all(e <= floor for errs in rec.sup_err.values() for e in errs)


def run_row_sequence(F: VectorFunctionSpec, m: MultiIndex, n_range, grids, quad: Quadrature = Quadrature(),
                     tol: Tolerances = Tolerances(), fit_floor: float = 1e-12, fit_cap: float = 1e-1,
                     jobs: int = 1, keep_approximants: bool = False, n_cap: int = 96,
                     delta_eps: Optional[float] = None) -> RowSequenceReport:
    """Sweep ``n`` with ``m`` fixed and collect errors, fits and bounds.

    ``n_range`` is an iterable of ``n`` or a pair ``(n_start, None)``; in the
    latter case the sweep stops once two consecutive ``n`` have every error
    at or below ``fit_floor`` (or at ``n_cap``).  Degenerate ``n`` are
    recorded, not fatal.
    """
    if isinstance(grids, CompactGrid):
        grids = (grids,)
    grids = tuple(grids)
    if m.d != F.d:
        raise ValueError(f"multi-index has {m.d} entries but F has {F.d} components")
    profile = pole_profile(F, m)
    for K in grids:
        validate_grid(K, profile, F.geometry)
    auto = isinstance(n_range, tuple) and len(n_range) == 2 and n_range[1] is None
    if auto:
        ns = list(range(int(n_range[0]), n_cap + 1))
    else:
        ns = [int(n) for n in n_range]
    if not ns:
        raise ValueError("empty n_range")
    if min(ns) < max(m):
        raise ValueError(f"n must be at least max(m) = {max(m)}")
    quad = quad.resolve(F)
    table = CoefficientTable(F, quad, m.total, max(ns) + tol.residual_buffer)
    LOGGER.info("row sweep m=%s n=%s..%s rho=%.6g N=%d dps=%s", m.m, ns[0], ns[-1], quad.rho, quad.N, quad.dps)

    records: list = []
    if auto or jobs <= 1:
        for n in ns:
            rec = _row_point(F, m, n, profile, table, tol, grids, keep_approximants)
            records.append(rec)
            LOGGER.debug("n=%d q_err=%.3e unique=%s", n, rec.q_coeff_err, rec.unique)
            if auto and len(records) >= 2 and all(_all_small(r, fit_floor) for r in records[-2:]):
                break
    else:
        args = [(F, m, n, profile, table, tol, grids, keep_approximants) for n in ns]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_row_point_star, args))

    bounds = {K.name: theoretical_bounds(profile, K) for K in grids}
    notes: list = []

    def _fit(errs, label):
        try:
            return fit_rate(errs, fit_floor, fit_cap)
        except InsufficientDataError as exc:
            notes.append(f"{label}: {exc}")
            return None

    r_sup = {
        K.name: [_fit({r.n: r.sup_err[K.name][a] for r in records}, f"r_sup[{K.name}][{a}]") for a in range(F.d)]
        for K in grids
    }
    r_Q = _fit({r.n: r.q_coeff_err for r in records}, "r_Q")
    r_pole = [_fit({r.n: r.pole_dist[j] for r in records}, f"r_pole[{j}]") for j in range(len(profile.poles))]

    D = delta_matrix(F, m, profile, delta_eps)
    n1 = None
    for r in reversed(records):
        if not r.unique:
            break
        n1 = r.n
    return RowSequenceReport(
        m=m, profile=profile, quad=quad, grids=grids, records=records, bounds=bounds,
        r_sup=r_sup, r_Q=r_Q, r_pole=r_pole,
        delta=complex(np.linalg.det(D)), delta_rel=delta_relative(D), n1=n1,
        fit_floor=fit_floor, fit_cap=fit_cap, fit_notes=notes,
    )
