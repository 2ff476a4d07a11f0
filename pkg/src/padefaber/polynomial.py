"""Power-basis complex polynomials and companion-matrix root finding."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from padefaber.errors import RootFindingError


@dataclass(frozen=True, eq=False)
class ComplexPolynomial:
    """Polynomial ``sum_j coeffs[j] z^j``.

    ``coeffs`` is a complex128 array, or an object array of ``mpmath.mpc``
    when produced by the extended-precision pipeline.  Trailing zeros are
    stripped on construction so ``degree == len(coeffs) - 1``; the zero
    polynomial keeps a single zero coefficient.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.dtype != object:
            c = c.astype(complex)
        c = np.atleast_1d(c)
        nz = np.flatnonzero(c != 0)
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    @property
    def is_extended(self) -> bool:
        return self.coeffs.dtype == object

    def __call__(self, z):
        out = 0
        for c in self.coeffs[::-1]:
            out = out * z + c
        if np.ndim(z) and np.isscalar(out):
            out = np.full(np.shape(z), out, dtype=complex)
        return out

    def __mul__(self, other: "ComplexPolynomial") -> "ComplexPolynomial":
        return ComplexPolynomial(np.convolve(self.coeffs, other.coeffs))

    def __eq__(self, other):
        if not isinstance(other, ComplexPolynomial):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def to_complex(self) -> "ComplexPolynomial":
        if not self.is_extended:
            return self
        return ComplexPolynomial(np.array([complex(c) for c in self.coeffs]))

    def scale(self, z) -> float:
        """``sum_j |c_j| |z|^j``, the natural scale for backward errors at ``z``."""
        r = abs(z)
        return float(sum(abs(complex(c)) * r**j for j, c in enumerate(self.coeffs)))

    @classmethod
    def from_roots(cls, roots, leading=1.0) -> "ComplexPolynomial":
        c = np.array([leading], dtype=complex)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)


def companion_matrix(coeffs):
    """Companion matrix of the monic rescaling of ``coeffs`` (power basis, low first)."""
    coeffs = np.asarray(coeffs)
    n = len(coeffs) - 1
    dtype = object if coeffs.dtype == object else complex
    C = np.zeros((n, n), dtype=dtype)
    if dtype is object:
        C[...] = mpmath.mpc(0)
        one = mpmath.mpc(1)
    else:
        one = 1.0
    for i in range(1, n):
        C[i, i - 1] = one
    C[:, -1] = [-c / coeffs[-1] for c in coeffs[:-1]]
    return C


def polynomial_roots(p: ComplexPolynomial, tol: float = 1e-10) -> np.ndarray:
    """All roots of ``p`` with multiplicity.

    Computed as eigenvalues of the companion matrix; LAPACK ``geev`` balances
    the matrix before the QR iteration.  Extended-precision polynomials use
    ``mpmath.eig`` at the ambient working precision and are rounded to
    complex128 at the end.

    Raises
    ------
    ValueError
        If ``deg p < 1``.
    RootFindingError
        If some root has relative backward error ``|p(r)| / sum |c_j||r|^j``
        above ``tol``, or the eigensolver does not converge.
    """
    return _sorted(np.array([complex(r) for r in native_roots(p, tol)]))


def native_roots(p: ComplexPolynomial, tol: float = 1e-10) -> list:
    """Roots of ``p`` in its own precision (``mpmath.mpc`` for extended polynomials), unsorted."""
    if p.degree < 1:
        raise ValueError("polynomial_roots needs degree >= 1")
    C = companion_matrix(p.coeffs)
    try:
        if p.is_extended:
            roots = list(mpmath.eig(mpmath.matrix(C.tolist()), left=False, right=False))
        else:
            roots = list(np.linalg.eigvals(C))
    except (np.linalg.LinAlgError, ZeroDivisionError) as exc:
        raise RootFindingError(f"companion eigenvalues did not converge: {exc}") from exc
    resid = [abs(p(r)) / max(p.scale(r), 1e-300) for r in roots]
    worst = max(float(r) for r in resid)
    if not all(np.isfinite(complex(r)) for r in roots) or worst > tol:
        raise RootFindingError(
            f"root residual {worst:.3e} exceeds tolerance {tol:.1e} (degree {p.degree})"
        )
    return roots


def _sorted(roots: np.ndarray) -> np.ndarray:
    # deterministic order: by modulus, then argument
    keys = np.lexsort((np.round(np.angle(roots), 12), np.round(np.abs(roots), 12)))
    return roots[keys]
