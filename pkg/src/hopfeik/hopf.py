"""The two-parameter family of toroidal Hopf maps.

A map in the family is chi = f(eta) * exp(i (n phi + m xi)) with nonzero
integer windings (m, n) along the xi and phi circles of the coordinate tori.
The radial profile has the closed form

    f(eta) = sinh^|n|(eta) * (|m| cosh(eta) + R)^|m| / (|n| cosh(eta) + R)^|n|,
    R = sqrt(n^2 + m^2 sinh^2(eta)),

which satisfies f(0) = 0, f(inf) = inf and the logarithmic-derivative
equation f'/f = sqrt(m^2 + n^2 / sinh^2(eta)).  With this profile the map
annihilates the unconjugated gradient square (grad chi).(grad chi), i.e. it
solves the static complex eikonal equation.

The profile depends only on |m| and |n|; the signs of m and n enter the
phase alone.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass

import numpy as np

from .coords import (
    EPS_ETA,
    EPS_Q,
    CartesianPoint,
    ToroidalPoint,
    to_toroidal,
    toroidal_frame,
)
from .errors import DomainError

# Above this eta the profile is evaluated in log space to dodge overflow of
# the cosh powers; the two branches agree to roundoff at the seam.
_LOG_SWITCH = 20.0
_EXP_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class HopfMapSpec:
    """Winding numbers (m, n) selecting one map of the family.

    m counts windings along xi (the small circle), n along phi (the large
    circle).  Both must be nonzero integers; the degenerate m = 0 or n = 0
    cases are not genuine Hopf maps.
    """

    m: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.n, int)):
            raise DomainError(f"m and n must be integers, got ({self.m!r}, {self.n!r})")
        if self.m == 0 or self.n == 0:
            raise DomainError(f"m and n must be nonzero, got ({self.m}, {self.n})")

    @property
    def label(self) -> str:
        return f"chi({self.m},{self.n})"


def _abs_mn(spec: HopfMapSpec) -> tuple[int, int]:
    return abs(spec.m), abs(spec.n)


def profile_log(spec: HopfMapSpec, eta: float) -> float:
    """ln f(eta), stable for all eta > 0."""
    if eta <= 0.0:
        raise DomainError(f"eta must be positive, got {eta}")
    am, an = _abs_mn(spec)
    if eta <= _LOG_SWITCH:
        sh, ch = math.sinh(eta), math.cosh(eta)
        R = math.sqrt(an * an + am * am * sh * sh)
        return (
            an * math.log(sh)
            + am * math.log(am * ch + R)
            - an * math.log(an * ch + R)
        )
    # Scaled by e^{-eta} so no intermediate overflows.
    e2 = math.exp(-2.0 * eta)
    sh_s = 0.5 * (1.0 - e2)   # sinh(eta) * e^{-eta}
    ch_s = 0.5 * (1.0 + e2)   # cosh(eta) * e^{-eta}
    R_s = math.sqrt(an * an * e2 + am * am * sh_s * sh_s)
    return (
        an * (eta + math.log(sh_s))
        + am * (eta + math.log(am * ch_s + R_s))
        - an * (eta + math.log(an * ch_s + R_s))
    )


def profile_f(spec: HopfMapSpec, eta: float) -> float:
    """Closed-form radial profile f(eta); f(0) = 0, strictly increasing.

    Beyond eta ~ 20 the value is produced from ln f, guarding the
    intermediate cosh powers against overflow.
    """
    if eta < 0.0:
        raise DomainError(f"eta must be >= 0, got {eta}")
    if eta == 0.0:
        return 0.0
    lf = profile_log(spec, eta)
    if lf > _EXP_MAX:
        return math.inf
    return math.exp(lf)


def profile_log_deriv(spec: HopfMapSpec, eta: float) -> float:
    """d(ln f)/d(eta), from analytic differentiation of the closed form."""
    if eta <= 0.0:
        raise DomainError(f"eta must be positive, got {eta}")
    am, an = _abs_mn(spec)
    sh, ch = math.sinh(eta), math.cosh(eta)
    R = math.sqrt(an * an + am * am * sh * sh)
    Rp = am * am * sh * ch / R
    return (
        an * ch / sh
        + am * (am * sh + Rp) / (am * ch + R)
        - an * (an * sh + Rp) / (an * ch + R)
    )


def ode_rhs(spec: HopfMapSpec, eta: float) -> float:
    """Right-hand side sqrt(m^2 + n^2 / sinh^2(eta)) of the profile equation.

    The closed-form profile satisfies d(ln f)/d(eta) = ode_rhs identically;
    the same expression reappears as the radial-coordinate change that makes
    the horizontal metric manifestly conformal to the target metric.
    """
    if eta <= 0.0:
        raise DomainError(f"eta must be positive, got {eta}")
    sh = math.sinh(eta)
    return math.sqrt(spec.m * spec.m + spec.n * spec.n / (sh * sh))


def phase(spec: HopfMapSpec, t: ToroidalPoint) -> float:
    """Total phase sigma = m*xi + n*phi, reduced to [0, 2*pi)."""
    return (spec.m * t.xi + spec.n * t.phi) % (2.0 * math.pi)


def evaluate_toroidal(spec: HopfMapSpec, t: ToroidalPoint) -> complex:
    """chi at a toroidal point: f(eta) * exp(i (m xi + n phi))."""
    if t.eta == 0.0:
        return 0j
    return profile_f(spec, t.eta) * cmath.exp(1j * (spec.m * t.xi + spec.n * t.phi))


def evaluate(spec: HopfMapSpec, p: CartesianPoint) -> complex:
    """chi at a Cartesian point.

    Exactly 0 on the z-axis (where eta = 0); raises FocalCircleError close
    to the focal circle, where chi reaches the point at infinity of the
    Riemann sphere.
    """
    return evaluate_toroidal(spec, to_toroidal(p))


def gradient_analytic(
    spec: HopfMapSpec,
    t: ToroidalPoint,
    *,
    eps_q: float = EPS_Q,
    eps_eta: float = EPS_ETA,
) -> np.ndarray:
    """Cartesian components of grad chi at a regular toroidal point.

    Implements q e^{i(m xi + n phi)} (f' e_eta + i m f e_xi
    + (i n / sinh eta) f e_phi) with f' = f * profile_log_deriv.  The
    unconjugated square of the result vanishes identically by the profile
    equation.
    """
    frame = toroidal_frame(t, eps_q=eps_q, eps_eta=eps_eta)
    q = t.q
    f = profile_f(spec, t.eta)
    fp = f * profile_log_deriv(spec, t.eta)
    ph = cmath.exp(1j * (spec.m * t.xi + spec.n * t.phi))
    sh = math.sinh(t.eta)
    return (q * ph) * (
        fp * frame.e_eta.astype(complex)
        + (1j * spec.m * f) * frame.e_xi
        + (1j * spec.n * f / sh) * frame.e_phi
    )


def gradient_at(spec: HopfMapSpec, p: CartesianPoint) -> np.ndarray:
    """Convenience wrapper: analytic gradient at a Cartesian point."""
    return gradient_analytic(spec, to_toroidal(p))


def modulus_gradient(spec: HopfMapSpec, t: ToroidalPoint) -> np.ndarray:
    """grad S = q f'(eta) e_eta in Cartesian components."""
    frame = toroidal_frame(t)
    fp = profile_f(spec, t.eta) * profile_log_deriv(spec, t.eta)
    return t.q * fp * frame.e_eta


def phase_gradient(spec: HopfMapSpec, t: ToroidalPoint) -> np.ndarray:
    """grad sigma = q (m e_xi + (n / sinh eta) e_phi) in Cartesian components."""
    frame = toroidal_frame(t)
    return t.q * (spec.m * frame.e_xi + (spec.n / math.sinh(t.eta)) * frame.e_phi)
