"""Exterior conformal maps for disks, segments and ellipses.

Every supported compact set ``E`` has an inverse exterior map of the form

    Psi(w) = c_{-1} w + c_0 + c_1 / w,      |w| > 1,

with ``c_{-1} > 0``.  The general disk/segment/ellipse is an affine image of
the canonical one (unit disk, [-1, 1], ellipse with foci +-1) and the affine
factors are folded into the three Laurent coefficients, so a single kernel
serves all kinds.  ``Phi`` is obtained by solving the quadratic
``c_{-1} w^2 + (c_0 - z) w + c_1 = 0`` and keeping the root of larger
modulus; the product of the two roots is ``c_1 / c_{-1}`` with modulus at
most one, so the exterior root is unambiguous and no branch cut of a square
root leaks into the exterior.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from padefaber.errors import PointInsideError

KINDS = ("disk", "segment", "ellipse")


@dataclass(frozen=True)
class Geometry:
    """A compact set with closed-form exterior conformal map.

    Attributes
    ----------
    kind : str
        One of ``"disk"``, ``"segment"``, ``"ellipse"``.
    laurent : tuple of complex
        ``(c_{-1}, c_0, c_1)``, Laurent coefficients of ``Psi``.
    params : dict
        The user-facing parameters the geometry was built from.
    """

    kind: str
    laurent: tuple
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        scale = self.laurent[0]
        if not (abs(complex(scale).imag) == 0.0 and complex(scale).real > 0):
            raise ValueError("c_{-1} must be real and positive")

    @property
    def capacity(self) -> float:
        """``c_{-1} = 1 / Phi'(infinity)``."""
        return complex(self.laurent[0]).real

    def laurent_coefficient(self, k: int) -> complex:
        """Coefficient ``c_k`` of ``Psi`` (zero beyond the stored range)."""
        idx = k + 1
        if 0 <= idx < len(self.laurent):
            return complex(self.laurent[idx])
        return 0j

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params}


def disk(center: complex = 0.0, radius: float = 1.0) -> Geometry:
    if not radius > 0:
        raise ValueError("disk radius must be positive")
    center = complex(center)
    return Geometry(
        "disk",
        (complex(radius), center, 0j),
        {"center": center, "radius": float(radius)},
    )


def segment(a: complex = -1.0, b: complex = 1.0) -> Geometry:
    a, b = complex(a), complex(b)
    if a == b:
        raise ValueError("segment endpoints must differ")
    mid = (a + b) / 2
    half = (b - a) / 2
    size = abs(half)
    # rotation e^{i theta} with theta = arg(half) moves into c_1 as e^{2 i theta}
    return Geometry(
        "segment",
        (complex(size / 2), mid, half * half / (2 * size)),
        {"a": a, "b": b},
    )


def ellipse(center: complex = 0.0, rotation: float = 0.0, c: float = 1.0, R: float = 2.0) -> Geometry:
    """Ellipse with foci ``center +- c e^{i rotation}`` and semi-axes ``c (R +- 1/R) / 2``."""
    if not c > 0:
        raise ValueError("ellipse focal half-distance c must be positive")
    if not R > 1:
        raise ValueError("ellipse parameter R must exceed 1")
    center = complex(center)
    rot2 = cmath.exp(2j * rotation)
    return Geometry(
        "ellipse",
        (complex(c * R / 2), center, c * rot2 / (2 * R)),
        {"center": center, "rotation": float(rotation), "c": float(c), "R": float(R)},
    )


def from_params(kind: str, **params) -> Geometry:
    builders = {"disk": disk, "segment": segment, "ellipse": ellipse}
    if kind not in builders:
        raise ValueError(f"unknown geometry kind {kind!r}")
    return builders[kind](**params)


def _as_array(z):
    arr = np.asarray(z)
    if arr.dtype != object:
        arr = arr.astype(complex)
    return arr


def _unwrap(arr, like):
    if np.ndim(like) == 0:
        return arr.item() if hasattr(arr, "item") else arr
    return arr


def _exterior_root(g: Geometry, z: np.ndarray) -> np.ndarray:
    a, c0, b = (complex(x) for x in g.laurent)
    d = z - c0
    if b == 0:
        return d / a
    s = np.sqrt(d * d - 4 * a * b)
    # pick the sign that avoids cancellation; that root has the larger modulus
    flip = np.real(np.conj(d) * s) < 0
    s = np.where(flip, -s, s)
    return (d + s) / (2 * a)


def phi_abs(g: Geometry, z):
    """``max(|Phi(z)|, 1)``, defined on the whole plane (E maps to 1)."""
    zz = _as_array(z)
    w = _exterior_root(g, zz)
    return _unwrap(np.maximum(np.abs(w), 1.0), z)


def phi(g: Geometry, z):
    """Exterior conformal map ``Phi``, normalized by ``Phi(inf) = inf``, ``Phi'(inf) > 0``.

    Raises
    ------
    PointInsideError
        If some ``z`` lies in ``E`` (``|Phi(z)| <= 1``).
    """
    zz = _as_array(z)
    w = _exterior_root(g, zz)
    bad = np.abs(w) <= 1.0
    if np.any(bad):
        first = zz[bad].ravel()[0] if zz.ndim else zz.item()
        raise PointInsideError(f"point {complex(first)} lies in E ({g.kind})")
    return _unwrap(w, z)


def psi(g: Geometry, w):
    """Inverse exterior map ``Psi(w)`` for ``|w| > 1``."""
    ww = _as_array(w)
    if ww.dtype != object and np.any(np.abs(ww) <= 1.0):
        raise ValueError("psi requires |w| > 1")
    return _unwrap(_psi_raw(g, ww), w)


def _psi_raw(g: Geometry, w):
    a, c0, b = g.laurent
    return c0 + a * w + b / w


def psi_prime(g: Geometry, w):
    a, _, b = (complex(x) for x in g.laurent)
    ww = _as_array(w)
    return _unwrap(a - b / (ww * ww), w)


def phi_prime(g: Geometry, z):
    """Derivative of ``Phi``; equals ``1 / Psi'(Phi(z))``."""
    w = phi(g, z)
    return 1.0 / psi_prime(g, w)


class LevelCurveNodes(NamedTuple):
    t: np.ndarray
    w: np.ndarray


def level_curve_nodes(g: Geometry, rho: float, N: int) -> LevelCurveNodes:
    """Equispaced nodes on ``Gamma_rho``: ``w_s = rho e^{2 pi i s / N}``, ``t_s = Psi(w_s)``."""
    if not rho > 1:
        raise ValueError(f"rho must exceed 1, got {rho}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    w = rho * np.exp(2j * np.pi * np.arange(N) / N)
    return LevelCurveNodes(_psi_raw(g, w), w)


def boundary_points(g: Geometry, N: int) -> np.ndarray:
    """Samples of the boundary of E, i.e. ``Psi`` on the unit circle."""
    w = np.exp(2j * np.pi * np.arange(N) / N)
    return _psi_raw(g, w)


def distance_to_set(g: Geometry, z: complex, N: int = 2048) -> float:
    """Approximate Euclidean distance from ``z`` to E via boundary sampling."""
    if phi_abs(g, z) <= 1.0:
        return 0.0
    return float(np.min(np.abs(boundary_points(g, N) - z)))


def canonical_radius(g: Geometry) -> float:
    """Radius of the smallest centered disk containing E (used for grid bounds)."""
    a, _, b = (complex(x) for x in g.laurent)
    return a.real + abs(b)


__all__ = [
    "Geometry",
    "LevelCurveNodes",
    "boundary_points",
    "canonical_radius",
    "disk",
    "distance_to_set",
    "ellipse",
    "from_params",
    "level_curve_nodes",
    "phi",
    "phi_abs",
    "phi_prime",
    "psi",
    "psi_prime",
    "segment",
]
