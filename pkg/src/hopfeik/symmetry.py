"""Solution-preserving transformations.

The static complex eikonal equation is invariant under holomorphic
reparametrizations of the target plane (chi -> F(chi)) and under conformal
transformations of the base R^3 (chi -> chi o T^{-1}).  Both act lazily on
ScalarField values: no grids are stored, so composed fields stay exact and
freely re-composable.

Target maps are restricted to polynomials and explicit rationals so the
holomorphy precondition is checkable and every pole is known.  Whether a
rational target map keeps the composed field a genuine Hopf map is left to
experiment; the residual invariance holds regardless away from the poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import ScalarField
from .coords import CartesianPoint
from .errors import DomainError, InversionSingularityError, PoleError

POLE_EPS = 1e-9


def _horner(coeffs: tuple[complex, ...], w: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * w + c
    return acc


@dataclass(frozen=True)
class TargetMap:
    """A holomorphic (or explicitly rational) map of the target plane.

    Coefficients are ascending: numer = (c0, c1, c2) means c0 + c1 w + c2 w^2.
    Poles of a rational map are the roots of the denominator; evaluation
    within pole_eps of one raises PoleError.
    """

    numer: tuple[complex, ...]
    denom: tuple[complex, ...] = (1.0 + 0j,)
    pole_eps: float = POLE_EPS

    def __post_init__(self):
        if len(self.numer) == 0 or all(c == 0 for c in self.numer):
            raise DomainError("numerator must have a nonzero coefficient")
        if len(self.denom) == 0 or all(c == 0 for c in self.denom):
            raise DomainError("denominator must have a nonzero coefficient")
        object.__setattr__(self, "numer", tuple(complex(c) for c in self.numer))
        object.__setattr__(self, "denom", tuple(complex(c) for c in self.denom))

    @classmethod
    def polynomial(cls, *coeffs: complex) -> "TargetMap":
        return cls(numer=tuple(coeffs))

    @classmethod
    def identity(cls) -> "TargetMap":
        return cls(numer=(0j, 1.0 + 0j))

    @classmethod
    def power(cls, k: int) -> "TargetMap":
        """w -> w^k for k >= 1."""
        if k < 1:
            raise DomainError("power must be >= 1")
        return cls(numer=(0j,) * k + (1.0 + 0j,))

    @property
    def is_rational(self) -> bool:
        return len(self.denom) > 1

    def poles(self) -> np.ndarray:
        """Registered poles: denominator roots (empty for polynomials)."""
        if not self.is_rational:
            return np.empty(0, dtype=complex)
        return np.roots(tuple(reversed(self.denom)))

    def __call__(self, w: complex) -> complex:
        if self.is_rational:
            for pole in self.poles():
                if abs(w - pole) < self.pole_eps:
                    raise PoleError(f"target map evaluated within {self.pole_eps} of pole {pole}")
            return _horner(self.numer, w) / _horner(self.denom, w)
        return _horner(self.numer, w)

    def derivative(self) -> "TargetMap":
        def diff(c: tuple[complex, ...]) -> tuple[complex, ...]:
            return tuple(k * c[k] for k in range(1, len(c))) or (0j,)

        if not self.is_rational:
            return TargetMap(numer=diff(self.numer))
        # (n/d)' = (n' d - n d') / d^2
        n, d = np.array(self.numer), np.array(self.denom)
        dn, dd = np.array(diff(self.numer)), np.array(diff(self.denom))
        num = np.polynomial.polynomial.polysub(
            np.polynomial.polynomial.polymul(dn, d),
            np.polynomial.polynomial.polymul(n, dd),
        )
        den = np.polynomial.polynomial.polymul(d, d)
        return TargetMap(numer=tuple(num), denom=tuple(den), pole_eps=self.pole_eps)

    def describe(self) -> str:
        def poly(c):
            return "+".join(f"({v})w^{k}" if k else f"({v})" for k, v in enumerate(c) if v != 0)

        return poly(self.numer) if not self.is_rational else f"[{poly(self.numer)}]/[{poly(self.denom)}]"


def compose_target(field: ScalarField, F: TargetMap) -> ScalarField:
    """New field p -> F(field(p)); the provenance label records the composition."""
    return ScalarField(lambda p: F(field(p)), f"{F.describe()} o {field.label}")


# ---------------------------------------------------------------------------
# Base-space conformal transformations


@dataclass(frozen=True)
class Translation:
    offset: tuple[float, float, float]

    def apply(self, v: np.ndarray) -> np.ndarray:
        return v + np.asarray(self.offset, dtype=float)

    def inverse(self) -> "Translation":
        return Translation(tuple(-c for c in self.offset))

    def describe(self) -> str:
        return f"translate{tuple(self.offset)}"


@dataclass(frozen=True)
class Rotation:
    """Rotation about an axis through the origin (Rodrigues form)."""

    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(a)
        if norm == 0.0:
            raise DomainError("rotation axis must be nonzero")
        object.__setattr__(self, "axis", tuple(a / norm))

    def apply(self, v: np.ndarray) -> np.ndarray:
        k = np.asarray(self.axis)
        c, s = math.cos(self.angle), math.sin(self.angle)
        return v * c + np.cross(k, v) * s + k * (k @ v) * (1.0 - c)

    def inverse(self) -> "Rotation":
        return Rotation(self.axis, -self.angle)

    def describe(self) -> str:
        return f"rotate(axis={tuple(round(c, 12) for c in self.axis)}, angle={self.angle})"


@dataclass(frozen=True)
class Dilation:
    scale: float

    def __post_init__(self):
        if self.scale <= 0.0:
            raise DomainError(f"dilation scale must be positive, got {self.scale}")

    def apply(self, v: np.ndarray) -> np.ndarray:
        return v * self.scale

    def inverse(self) -> "Dilation":
        return Dilation(1.0 / self.scale)

    def describe(self) -> str:
        return f"dilate({self.scale})"


@dataclass(frozen=True)
class Inversion:
    """Inversion through the unit sphere, x -> x / |x|^2 (its own inverse).

    Together with translations, rotations and dilations this generates the
    full conformal group; special conformal transformations arise as
    inversion-translation-inversion sandwiches.
    """

    def apply(self, v: np.ndarray) -> np.ndarray:
        r2 = float(v @ v)
        if r2 == 0.0:
            raise InversionSingularityError("inversion is singular at the origin")
        return v / r2

    def inverse(self) -> "Inversion":
        return Inversion()

    def describe(self) -> str:
        return "invert"


Primitive = Translation | Rotation | Dilation | Inversion


@dataclass(frozen=True)
class BaseConformalMap:
    """An ordered composition of conformal primitives (first entry acts first)."""

    steps: tuple[Primitive, ...] = field(default_factory=tuple)

    @classmethod
    def of(cls, *steps: Primitive) -> "BaseConformalMap":
        return cls(tuple(steps))

    @classmethod
    def identity(cls) -> "BaseConformalMap":
        return cls(())

    def then(self, other: "BaseConformalMap") -> "BaseConformalMap":
        """self followed by other (i.e. other o self)."""
        return BaseConformalMap(self.steps + other.steps)

    def apply(self, p: CartesianPoint) -> CartesianPoint:
        v = p.as_array()
        for s in self.steps:
            v = s.apply(v)
        return CartesianPoint.from_array(v)

    def apply_inverse(self, p: CartesianPoint) -> CartesianPoint:
        v = p.as_array()
        for s in reversed(self.steps):
            v = s.inverse().apply(v)
        return CartesianPoint.from_array(v)

    def describe(self) -> str:
        return " then ".join(s.describe() for s in self.steps) or "identity"


def transform_base(field: ScalarField, T: BaseConformalMap) -> ScalarField:
    """New field p -> field(T^{-1}(p)); solutions stay solutions since T is conformal."""
    return ScalarField(lambda p: field(T.apply_inverse(p)), f"{field.label} o ({T.describe()})^-1")
