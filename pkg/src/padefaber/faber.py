"""Faber polynomials, Faber coefficients and Faber series.

Coefficients are computed by the substitution ``t = Psi(rho e^{i theta})``,
under which

    [G]_n = (1 / 2 pi i) \\oint_{Gamma_rho} G(t) Phi'(t) Phi(t)^{-(n+1)} dt
          = rho^{-n} (1/N) sum_s G(Psi(rho e^{2 pi i s/N})) e^{-2 pi i n s/N}

up to the trapezoidal error, i.e. a scaled DFT of the samples.  Double
precision uses ``numpy.fft``; passing ``dps`` evaluates the same sum in
``mpmath`` at that many decimal digits (needed when a row sequence pushes
coefficients far below the double-precision quadrature floor).  Up to 30
digits the extended path samples and transforms in vectorized double-double
arithmetic (``engine="dd"``), which is much faster than ``mpmath`` and
returns ``mpmath`` numbers all the same.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from padefaber.ddarith import DDComplex, stack, unit_roots
from padefaber.errors import IndeterminateRateError, QuadratureError
from padefaber.geometry import Geometry, level_curve_nodes
from padefaber.polynomial import ComplexPolynomial

LOGGER = logging.getLogger(__name__)

NOISE_FLOOR = 1e-14
DD_MAX_DPS = 30
ENGINES = ("auto", "double", "dd", "mpmath")


def resolve_engine(dps: Optional[int], engine: str = "auto") -> str:
    """Pick the arithmetic for sampling and transforming.

    ``dps=None`` means double precision; otherwise ``auto`` uses
    double-double up to 30 digits and ``mpmath`` beyond.
    """
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if dps is None:
        if engine not in ("auto", "double"):
            raise ValueError(f"engine {engine!r} needs dps")
        return "double"
    if engine == "double":
        raise ValueError("engine 'double' does not take dps")
    if engine == "auto":
        return "dd" if dps <= DD_MAX_DPS else "mpmath"
    if engine == "dd" and dps > DD_MAX_DPS:
        raise ValueError(f"double-double carries about 32 digits; dps = {dps} needs engine 'mpmath'")
    return engine


@dataclass(frozen=True, eq=False)
class FaberBasis:
    geometry: Geometry
    polys: tuple

    @property
    def n_max(self) -> int:
        return len(self.polys) - 1

    def __getitem__(self, n: int) -> ComplexPolynomial:
        return self.polys[n]

    def __len__(self) -> int:
        return len(self.polys)


@dataclass(frozen=True, eq=False)
class FaberCoefficients:
    """``values[n] = [G]_n`` together with the quadrature that produced them.

    In extended precision ``values`` is an object array of ``mpmath.mpc``.
    """

    values: np.ndarray
    rho_used: float
    N_used: int

    def __len__(self) -> int:
        return len(self.values)

    def as_complex(self) -> np.ndarray:
        if self.values.dtype == object:
            return np.vectorize(complex, otypes=[complex])(self.values)
        return self.values


def faber_basis(g: Geometry, n_max: int) -> FaberBasis:
    """Faber polynomials ``Phi_0 .. Phi_{n_max}`` in the power basis.

    Uses the recurrence

        c_{-1} Phi_{n+1}(z) = z Phi_n(z) - sum_{k=0}^{n} c_k Phi_{n-k}(z) - n c_n

    which follows from comparing Laurent expansions of ``Phi(z)^n``.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    c_m1 = g.capacity
    polys = [np.array([1.0 + 0j])]
    for n in range(n_max):
        nxt = np.zeros(n + 2, dtype=complex)
        nxt[1:] = polys[n]
        for k in range(n + 1):
            ck = g.laurent_coefficient(k)
            if ck != 0:
                nxt[: n - k + 1] -= ck * polys[n - k]
        nxt[0] -= n * g.laurent_coefficient(n)
        polys.append(nxt / c_m1)
    return FaberBasis(g, tuple(ComplexPolynomial(p) for p in polys))


def faber_values(g: Geometry, z, n_max: int) -> np.ndarray:
    """Values ``Phi_k(z)`` for ``k = 0..n_max`` by the same recurrence, pointwise.

    Returns an array of shape ``(n_max + 1,) + shape(z)``.  Evaluating the
    recurrence on values rather than expanding into monomials avoids the
    cancellation of the power-basis form (for a segment the monomial
    coefficients of ``Phi_n`` grow like ``2^n``).
    """
    if isinstance(z, DDComplex):
        return _faber_values_generic(g, z, n_max)
    z = np.asarray(z, dtype=complex)
    out = np.empty((n_max + 1,) + z.shape, dtype=complex)
    out[0] = 1.0
    c_m1 = g.capacity
    K = len(g.laurent) - 2
    for n in range(n_max):
        acc = z * out[n]
        for k in range(min(n, K) + 1):
            ck = g.laurent_coefficient(k)
            if ck != 0:
                acc = acc - ck * out[n - k]
        acc = acc - n * g.laurent_coefficient(n)
        out[n + 1] = acc / c_m1
    return out


def _faber_values_generic(g: Geometry, z, n_max: int):
    c_m1 = g.capacity
    K = len(g.laurent) - 2
    vals = [z * 0 + 1]
    for n in range(n_max):
        acc = z * vals[n]
        for k in range(min(n, K) + 1):
            ck = g.laurent_coefficient(k)
            if ck != 0:
                acc = acc - ck * vals[n - k]
        cn = g.laurent_coefficient(n)
        if cn != 0:
            acc = acc - n * cn
        vals.append(acc / c_m1)
    return stack(vals)


def trapezoid_coefficients(samples, rho: float, n_max: int, dps: Optional[int] = None) -> np.ndarray:
    """Scaled DFT ``rho^{-n} (1/N) sum_s samples[s] e^{-2 pi i n s / N}``, ``n <= n_max``.

    ``samples`` holds the integrand values at the equispaced level-curve
    nodes.  With ``dps`` the samples must be ``mpmath`` numbers or a
    :class:`DDComplex` array and the result is an object array of
    ``mpmath.mpc``.  Double-double samples may carry a leading batch axis,
    in which case the result has shape ``(K, n_max + 1)``.
    """
    if isinstance(samples, DDComplex):
        return _trapezoid_dd(samples, rho, n_max, dps or DD_MAX_DPS)
    N = len(samples)
    if dps is None:
        spec = np.fft.fft(np.asarray(samples, dtype=complex))[: n_max + 1] / N
        return spec * rho ** (-np.arange(n_max + 1, dtype=float))
    with mpmath.workdps(dps):
        twiddle = _twiddles(N, dps)
        rho_mp = mpmath.mpf(rho)
        samples = list(samples)
        out = np.empty(n_max + 1, dtype=object)
        for n in range(n_max + 1):
            row = [twiddle[(n * s) % N] for s in range(N)]
            out[n] = mpmath.fdot(samples, row) / N / rho_mp**n
        return out


def _trapezoid_dd(samples: DDComplex, rho: float, n_max: int, dps: int) -> np.ndarray:
    batch = samples.ndim == 2
    rows = samples if batch else samples[None, :]
    N = rows.shape[-1]
    idx = (np.arange(n_max + 1)[:, None] * np.arange(N)[None, :]) % N
    T = unit_roots(N)[idx]
    with mpmath.workdps(dps):
        scale = [1 / (mpmath.mpf(rho) ** n * N) for n in range(n_max + 1)]
        out = np.empty((rows.shape[0], n_max + 1), dtype=object)
        for k in range(rows.shape[0]):
            spec = (T * rows[k][None, :]).sum(axis=-1).to_mp()
            out[k] = [spec[n] * scale[n] for n in range(n_max + 1)]
    return out if batch else out[0]


_TWIDDLE_CACHE: dict = {}


def _twiddles(N: int, dps: int):
    key = (N, dps)
    if key not in _TWIDDLE_CACHE:
        _TWIDDLE_CACHE[key] = [mpmath.expjpi(mpmath.mpf(-2 * s) / N) for s in range(N)]
    return _TWIDDLE_CACHE[key]


def level_curve_nodes_mp(g: Geometry, rho: float, N: int, dps: int):
    """Level-curve nodes ``(t, w)`` as object arrays of ``mpmath.mpc``."""
    if not rho > 1:
        raise ValueError(f"rho must exceed 1, got {rho}")
    with mpmath.workdps(dps):
        a, c0, b = (mpmath.mpc(complex(x)) for x in g.laurent)
        rho_mp = mpmath.mpf(rho)
        w = np.empty(N, dtype=object)
        t = np.empty(N, dtype=object)
        for s in range(N):
            ws = rho_mp * mpmath.expjpi(mpmath.mpf(2 * s) / N)
            w[s] = ws
            t[s] = c0 + a * ws + b / ws
    return t, w


def level_curve_nodes_dd(g: Geometry, rho: float, N: int):
    """Level-curve nodes ``(t, w)`` as :class:`DDComplex` arrays."""
    if not rho > 1:
        raise ValueError(f"rho must exceed 1, got {rho}")
    r = unit_roots(N)
    w = DDComplex(r.rh, r.rl, -r.ih, -r.il) * float(rho)
    a, c0, b = (complex(x) for x in g.laurent)
    t = w * a + c0
    if b != 0:
        t = t + b / w
    return t, w


def _check_finite(samples, t):
    if isinstance(samples, DDComplex):
        ok = np.isfinite(samples.rh) & np.isfinite(samples.ih) & np.isfinite(samples.rl) & np.isfinite(samples.il)
        bad = np.flatnonzero(~ok.reshape(-1, ok.shape[-1]).all(axis=0)).tolist()
    elif samples.dtype == object:
        bad = [i for i, v in enumerate(samples) if not mpmath.isfinite(v)]
    else:
        bad = np.flatnonzero(~np.isfinite(samples)).tolist()
    if bad:
        i = bad[0]
        node = t[i].to_complex() if isinstance(t, DDComplex) else complex(t[i])
        raise QuadratureError(f"non-finite integrand sample at node {i}: t = {complex(node)}")


def faber_coefficients(
    G: Callable,
    g: Geometry,
    n_max: int,
    rho: float,
    N: int = 4096,
    dps: Optional[int] = None,
    engine: str = "auto",
) -> FaberCoefficients:
    """Faber coefficients ``[G]_0 .. [G]_{n_max}`` by trapezoidal quadrature on ``Gamma_rho``.

    Parameters
    ----------
    G : callable
        Vectorized function; receives the array of nodes ``t_s`` (complex, or
        object dtype holding ``mpmath.mpc`` when ``dps`` is given).
    g : Geometry
    n_max : int
    rho : float
        Level-curve index, ``1 < rho < rho_0(G)``.
    N : int
        Number of nodes, at least ``2 (n_max + 1)``.
    dps : int, optional
        Decimal digits for the extended-precision path.
    engine : {"auto", "double", "dd", "mpmath"}
        Arithmetic used to sample ``G`` and transform; see :func:`resolve_engine`.
        Under ``dd``, ``G`` receives a :class:`DDComplex` array and may
        return one with a leading batch axis.

    Raises
    ------
    ValueError
        If ``rho <= 1`` or ``N`` is too small for ``n_max``.
    QuadratureError
        If ``G`` is not finite at some node.
    """
    if not rho > 1:
        raise ValueError(f"rho must exceed 1, got {rho}")
    if N < 2 * (n_max + 1):
        raise ValueError(f"N = {N} is too small for n_max = {n_max}; need N >= {2 * (n_max + 1)}")
    kind = resolve_engine(dps, engine)
    if kind == "double":
        t, _ = level_curve_nodes(g, rho, N)
        samples = np.asarray(G(t), dtype=complex)
    elif kind == "dd":
        t, _ = level_curve_nodes_dd(g, rho, N)
        samples = DDComplex.coerce(G(t))
    else:
        t, _ = level_curve_nodes_mp(g, rho, N, dps)
        with mpmath.workdps(dps):
            samples = np.asarray(G(t), dtype=object)
    _check_finite(samples, t)
    return FaberCoefficients(trapezoid_coefficients(samples, rho, n_max, dps), float(rho), int(N))


def evaluate_faber_series(c: FaberCoefficients, basis: FaberBasis, z, n_terms: int):
    """Partial sum ``sum_{n < n_terms} [G]_n Phi_n(z)``."""
    if n_terms > min(len(c), len(basis)):
        raise ValueError("n_terms exceeds the available coefficients or basis size")
    if n_terms <= 0:
        return 0j if np.ndim(z) == 0 else np.zeros(np.shape(z), dtype=complex)
    vals = faber_values(basis.geometry, z, n_terms - 1)
    coef = c.as_complex()[:n_terms]
    out = np.tensordot(coef, vals, axes=(0, 0))
    return complex(out) if np.ndim(z) == 0 else out


def estimate_rho0(c: FaberCoefficients, window: Sequence[int]) -> float:
    """Root-test estimate of ``rho_0(G)`` from a geometric fit of ``|[G]_n|``.

    ``window`` is an inclusive index range ``(lo, hi)`` (or any iterable of
    indices).  Entries below ``1e-14 * max_n |[G]_n|`` are discarded; the
    estimate is ``1 / exp(slope)`` of the least-squares line through
    ``log |[G]_n|`` versus ``n``.

    Raises
    ------
    IndeterminateRateError
        If fewer than two coefficients in the window clear the noise floor.
    """
    idx = _window_indices(window, len(c))
    if not idx:
        raise ValueError("empty window")
    mags = np.abs(c.as_complex())
    floor = NOISE_FLOOR * float(np.max(mags)) if mags.size else 0.0
    keep = [n for n in idx if mags[n] > floor and mags[n] > 0]
    if len(keep) < 2:
        raise IndeterminateRateError(
            f"only {len(keep)} coefficient(s) in window above noise floor {floor:.3e}"
        )
    ns = np.array(keep, dtype=float)
    slope = np.polyfit(ns, np.log(mags[keep]), 1)[0]
    return float(1.0 / np.exp(slope))


def _window_indices(window, length):
    if isinstance(window, range):
        idx = list(window)
    elif len(window) == 2 and all(isinstance(v, (int, np.integer)) for v in window):
        lo, hi = window
        idx = list(range(lo, hi + 1))
    else:
        idx = [int(v) for v in window]
    return [n for n in idx if 0 <= n < length]
