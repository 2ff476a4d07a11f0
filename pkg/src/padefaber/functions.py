"""Ground-truth meromorphic test functions.

Each component is a finite sum of principal parts plus a polynomial, so its
poles, orders and the vector pole data are known exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from padefaber.geometry import Geometry, phi_abs
from padefaber.polynomial import ComplexPolynomial

POLE_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class PrincipalPart:
    """``sum_{l=1}^{order} coefficients[l-1] (z - pole)^{-l}``."""

    pole: complex
    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "pole", complex(self.pole))
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in self.coefficients))
        if not self.coefficients:
            raise ValueError("principal part needs at least one coefficient")
        if self.coefficients[-1] == 0:
            raise ValueError(f"top-order coefficient at pole {self.pole} must be nonzero")

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def __call__(self, z):
        inv = 1 / (z - self.pole)
        out = 0
        # Horner in (z - pole)^{-1}
        for c in self.coefficients[::-1]:
            out = (out + c) * inv
        return out


@dataclass(frozen=True)
class ScalarFunction:
    parts: tuple = ()
    entire: ComplexPolynomial = field(default_factory=lambda: ComplexPolynomial(np.zeros(1)))

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        poles = [p.pole for p in self.parts]
        for i, a in enumerate(poles):
            for b in poles[i + 1:]:
                if abs(a - b) <= POLE_MERGE_TOL * max(1.0, abs(a)):
                    raise ValueError(f"pole {a} listed twice in one component")

    def __call__(self, z):
        out = self.entire(z)
        for p in self.parts:
            out = out + p(z)
        return out

    def pole_orders(self) -> dict:
        return {p.pole: p.order for p in self.parts}

    def scaled(self, factor: complex) -> "ScalarFunction":
        return ScalarFunction(
            tuple(PrincipalPart(p.pole, tuple(factor * c for c in p.coefficients)) for p in self.parts),
            ComplexPolynomial(factor * self.entire.coeffs),
        )


@dataclass(frozen=True)
class VectorFunctionSpec:
    """A vector ``F = (F_1, .., F_d)`` of rational test functions on a geometry.

    Every pole must satisfy ``|Phi(pole)| > 1`` so each component is
    holomorphic on a neighbourhood of E.
    """

    components: tuple
    geometry: Geometry

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValueError("need at least one component")
        for alpha, comp in enumerate(self.components):
            for p in comp.parts:
                if phi_abs(self.geometry, p.pole) <= 1.0:
                    raise ValueError(f"pole {p.pole} of component {alpha} lies in E")

    @property
    def d(self) -> int:
        return len(self.components)

    def __getitem__(self, alpha: int) -> ScalarFunction:
        return self.components[alpha]

    def evaluate(self, alpha: int, z):
        return self.components[alpha](z)

    def vector_poles(self) -> list:
        """Distinct poles of the vector with their vector orders (max over components)."""
        merged: list = []
        for comp in self.components:
            for p in comp.parts:
                for entry in merged:
                    if abs(entry[0] - p.pole) <= POLE_MERGE_TOL * max(1.0, abs(p.pole)):
                        entry[1] = max(entry[1], p.order)
                        break
                else:
                    merged.append([p.pole, p.order])
        return [(lam, tau) for lam, tau in merged]

    def all_poles(self) -> list:
        return [lam for lam, _ in self.vector_poles()]

    def with_component_scaled(self, alpha: int, factor: complex) -> "VectorFunctionSpec":
        comps = list(self.components)
        comps[alpha] = comps[alpha].scaled(factor)
        return VectorFunctionSpec(tuple(comps), self.geometry)


def simple_poles(*poles, residues=None) -> ScalarFunction:
    """Convenience constructor for ``sum_j r_j / (z - p_j)``."""
    residues = residues or [1.0] * len(poles)
    return ScalarFunction(tuple(PrincipalPart(p, (r,)) for p, r in zip(poles, residues)))
