"""Toroidal coordinates on R^3.

The chart (eta, xi, phi) is defined by

    x = sinh(eta) cos(phi) / q,   y = sinh(eta) sin(phi) / q,
    z = sin(xi) / q,              q = cosh(eta) - cos(xi),

with the focal circle C = {z = 0, x^2 + y^2 = 1} at eta -> infinity and the
z-axis at eta = 0.  Surfaces of constant eta are nested tori enclosing C.
The single degenerate point of the forward map, (eta, xi) = (0, 0) where
q = 0, represents spatial infinity.

The inverse map uses the bipolar-distance construction in the
(rho, z) = (sqrt(x^2 + y^2), z) half-plane: with d1, d2 the distances to the
half-plane traces (rho = -1, z = 0) and (rho = +1, z = 0) of the focal
circle,

    eta = ln(d1 / d2),  xi = atan2(2 z, rho^2 + z^2 - 1),  phi = atan2(y, x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AxisDegeneracyError, DegeneratePointError, FocalCircleError

TWO_PI = 2.0 * math.pi

# Default numerical guards; every operation accepts overrides.
EPS_Q = 1e-12    # degenerate-point guard on q
EPS_ETA = 1e-8   # z-axis guard: phi (and e_phi) undefined below this eta
ETA_MAX = 20.0   # near-focal-circle guard on the inverse map


def _wrap_angle(a: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    a = math.fmod(a, TWO_PI)
    return a + TWO_PI if a < 0.0 else a


@dataclass(frozen=True)
class CartesianPoint:
    """A point of R^3 in Cartesian coordinates."""

    x: float
    y: float
    z: float

    @property
    def r2(self) -> float:
        """Squared distance from the origin, x^2 + y^2 + z^2."""
        return self.x * self.x + self.y * self.y + self.z * self.z

    @property
    def rho(self) -> float:
        """Cylindrical radius sqrt(x^2 + y^2)."""
        return math.hypot(self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "CartesianPoint":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class ToroidalPoint:
    """A point in toroidal coordinates; angles are stored reduced to [0, 2*pi)."""

    eta: float
    xi: float
    phi: float

    def __post_init__(self):
        if not (self.eta >= 0.0 and math.isfinite(self.eta)):
            raise DegeneratePointError(f"eta must be finite and >= 0, got {self.eta}")
        object.__setattr__(self, "xi", _wrap_angle(self.xi))
        object.__setattr__(self, "phi", _wrap_angle(self.phi))

    @property
    def q(self) -> float:
        """Inverse local scale factor q = cosh(eta) - cos(xi)."""
        return math.cosh(self.eta) - math.cos(self.xi)


@dataclass(frozen=True)
class Frame:
    """Orthonormal triple (e_eta, e_xi, e_phi) as Cartesian unit vectors."""

    e_eta: np.ndarray
    e_xi: np.ndarray
    e_phi: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """Rows are the frame vectors, in (eta, xi, phi) order."""
        return np.vstack([self.e_eta, self.e_xi, self.e_phi])


def scale_factor(t: ToroidalPoint) -> float:
    """q = cosh(eta) - cos(xi); vanishes only at the point at infinity."""
    return t.q


def to_cartesian(t: ToroidalPoint, *, eps_q: float = EPS_Q) -> CartesianPoint:
    """Map a toroidal point to Cartesian coordinates.

    Raises
    ------
    DegeneratePointError
        If q < eps_q, i.e. the point represents spatial infinity.
    """
    q = t.q
    if q < eps_q:
        raise DegeneratePointError(
            f"q = {q:.3e} < {eps_q:.1e} at (eta={t.eta}, xi={t.xi}): point at infinity"
        )
    s = math.sinh(t.eta)
    return CartesianPoint(
        s * math.cos(t.phi) / q,
        s * math.sin(t.phi) / q,
        math.sin(t.xi) / q,
    )


def to_toroidal(p: CartesianPoint, *, eta_max: float = ETA_MAX) -> ToroidalPoint:
    """Map a Cartesian point to toroidal coordinates.

    On the z-axis phi is undefined; the canonical value phi = 0 is returned
    there.  Points closer to the focal circle than roughly e^{-eta_max} are
    rejected, since eta diverges on the circle itself.

    Raises
    ------
    FocalCircleError
        If the computed eta exceeds eta_max.
    """
    rho = math.hypot(p.x, p.y)
    d1 = math.hypot(rho + 1.0, p.z)
    d2 = math.hypot(rho - 1.0, p.z)
    if d2 <= d1 * math.exp(-eta_max):
        raise FocalCircleError(
            f"point ({p.x}, {p.y}, {p.z}) lies on the focal circle within tolerance "
            f"(eta > {eta_max})"
        )
    eta = math.log(d1 / d2)
    xi = math.atan2(2.0 * p.z, rho * rho + p.z * p.z - 1.0)
    phi = math.atan2(p.y, p.x) if rho > 0.0 else 0.0
    return ToroidalPoint(eta, xi, phi)


def toroidal_frame(
    t: ToroidalPoint, *, eps_q: float = EPS_Q, eps_eta: float = EPS_ETA
) -> Frame:
    """Orthonormal frame (e_eta, e_xi, e_phi) at a toroidal point.

    The vectors are the unit tangents of the coordinate lines, so the
    gradients of the coordinate functions are

        grad eta = q e_eta,  grad xi = q e_xi,  grad phi = (q / sinh eta) e_phi.

    Raises
    ------
    DegeneratePointError
        If q < eps_q (point at infinity).
    AxisDegeneracyError
        If eta < eps_eta, where phi and hence e_phi are undefined.
    """
    q = t.q
    if q < eps_q:
        raise DegeneratePointError(f"q = {q:.3e} < {eps_q:.1e}: frame undefined")
    if t.eta < eps_eta:
        raise AxisDegeneracyError(
            f"eta = {t.eta:.3e} < {eps_eta:.1e}: azimuthal direction undefined on the z-axis"
        )
    ch, sh = math.cosh(t.eta), math.sinh(t.eta)
    cx, sx = math.cos(t.xi), math.sin(t.xi)
    cp, sp = math.cos(t.phi), math.sin(t.phi)
    a = (1.0 - ch * cx) / q
    e_eta = np.array([cp * a, sp * a, -sx * sh / q])
    b = -sh * sx / q
    e_xi = np.array([cp * b, sp * b, (ch * cx - 1.0) / q])
    e_phi = np.array([-sp, cp, 0.0])
    return Frame(e_eta, e_xi, e_phi)


# ---------------------------------------------------------------------------
# Scalar fast paths used by the tracer and residual scans.  They avoid the
# dataclass round trip but implement the same formulas as above.

def _toroidal_scalars(x: float, y: float, z: float):
    """Return (rho, eta, cosh, sinh, cxi, sxi, q) without trig calls.

    cosh/sinh of eta come from the distance ratio d1/d2, cos/sin of xi from
    the atan2 representation; no angle is ever materialized.
    """
    rho = math.hypot(x, y)
    d1 = math.hypot(rho + 1.0, z)
    d2 = math.hypot(rho - 1.0, z)
    if d2 == 0.0:
        raise FocalCircleError(f"point ({x}, {y}, {z}) lies on the focal circle")
    r = d1 / d2
    ch = 0.5 * (r + 1.0 / r)
    sh = 0.5 * (r - 1.0 / r)
    dd = d1 * d2
    cxi = (rho * rho + z * z - 1.0) / dd
    sxi = 2.0 * z / dd
    return rho, math.log(r), ch, sh, cxi, sxi, ch - cxi


def distance_to_focal_circle(p: CartesianPoint) -> float:
    """Euclidean distance from p to the circle {z = 0, x^2 + y^2 = 1}."""
    return math.hypot(p.rho - 1.0, p.z)
