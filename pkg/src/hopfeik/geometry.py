"""Vertical/horizontal splitting and the conformal-submersion check.

Each map of the family fibers R^3 (minus its singular loci) by its level
curves.  At a regular point the tangent space splits into the vertical line
spanned by the fiber direction e3 (annihilated by the differential of the
map) and the horizontal plane spanned by e1 ~ grad S and e2 = e3 x e1.
Restricting the Euclidean metric to the horizontal plane and expressing it
in the coordinates (S, sigma) of the target plane produces a 2x2 matrix
that is conformal to the flat polar target metric diag(1, rho^2) at
rho = S; the local scale factor is the quantitative content of the check.

Frames here are unit with respect to the Euclidean R^3 metric.  The scale
factor would change under the alternative convention that strips the
toroidal q-prefactor from the metric, but the two dimensionless residuals
reported by conformal_check would not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import DEFAULT_FD_STEP, ScalarField, fd_modulus_phase_gradient
from .coords import CartesianPoint, to_toroidal, toroidal_frame
from .errors import DomainError
from .hopf import HopfMapSpec, modulus_gradient, phase_gradient


@dataclass(frozen=True)
class SplitFrame:
    """Orthonormal (e1, e2, e3): horizontal pair plus vertical fiber direction."""

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    def as_matrix(self) -> np.ndarray:
        return np.vstack([self.e1, self.e2, self.e3])


@dataclass(frozen=True)
class CoFrame:
    """Covectors dual to a SplitFrame: (omega_i, e_j) = delta_ij."""

    omega1: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray

    def as_matrix(self) -> np.ndarray:
        return np.vstack([self.omega1, self.omega2, self.omega3])


@dataclass(frozen=True)
class ConformalCheckResult:
    """Local comparison of the horizontal metric with the target metric.

    scale is the local conformal factor lambda = H11/T11 (positive at
    regular points); the two residuals are dimensionless and vanish when the
    metrics are exactly proportional.
    """

    scale: float
    offdiag_residual: float
    proportionality_residual: float


def vertical_field(spec: HopfMapSpec, p: CartesianPoint) -> np.ndarray:
    """Unit vector along the fiber through p, proportional to grad S x grad sigma.

    This is the unique direction annihilated by both dS and dsigma, hence by
    the differential of the map.
    """
    t = to_toroidal(p)
    gS = modulus_gradient(spec, t)
    gsig = phase_gradient(spec, t)
    v = np.cross(gS, gsig)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DomainError(f"degenerate differential at ({p.x}, {p.y}, {p.z})")
    return v / norm


def split_frame(spec: HopfMapSpec, p: CartesianPoint) -> SplitFrame:
    """Right-handed orthonormal frame adapted to the fibration at p.

    e1 points along grad S (so the horizontal metric is nearly diagonal in
    the (dS, dsigma) basis), e3 along the fiber, e2 = e3 x e1.
    """
    t = to_toroidal(p)
    gS = modulus_gradient(spec, t)
    nS = np.linalg.norm(gS)
    if nS == 0.0:
        raise DomainError(f"grad S vanishes at ({p.x}, {p.y}, {p.z})")
    e1 = gS / nS
    e3 = vertical_field(spec, p)
    e2 = np.cross(e3, e1)
    return SplitFrame(e1, e2, e3)


def coframe(f: SplitFrame) -> CoFrame:
    """Dual coframe, rows of the inverse transpose of the frame matrix.

    For an orthonormal frame this equals the frame itself; computing the
    inverse keeps the duality exact for any nondegenerate input.
    """
    M = f.as_matrix()
    det = np.linalg.det(M)
    if abs(det) < 1e-14:
        raise DomainError(f"frame matrix is singular (det={det:.3e})")
    W = np.linalg.inv(M).T
    return CoFrame(W[0], W[1], W[2])


def horizontal_metric(
    spec: HopfMapSpec, p: CartesianPoint, h: float = DEFAULT_FD_STEP
) -> np.ndarray:
    """Euclidean metric on the horizontal plane in the (dS, dsigma) basis.

    grad S and grad sigma span the horizontal plane; the matrix of the
    restricted metric in the basis dual to (dS, dsigma) is the inverse Gram
    matrix of the two gradients.  The differentials are taken by central
    differences (with local phase unwrap), keeping this check independent of
    the analytic gradient path.
    """
    fld = ScalarField.from_map(spec)
    _, gS, gsig = fd_modulus_phase_gradient(fld, p, h)
    gram = np.array([[gS @ gS, gS @ gsig], [gS @ gsig, gsig @ gsig]])
    det = gram[0, 0] * gram[1, 1] - gram[0, 1] ** 2
    if det <= 0.0:
        raise DomainError(
            f"grad S and grad sigma are dependent at ({p.x}, {p.y}, {p.z})"
        )
    return np.linalg.inv(gram)


def target_metric(rho: float) -> np.ndarray:
    """Flat plane metric in polar coordinates, diag(1, rho^2)."""
    if rho <= 0.0:
        raise DomainError(f"rho must be positive, got {rho}")
    return np.array([[1.0, 0.0], [0.0, rho * rho]])


def conformal_check(
    spec: HopfMapSpec, p: CartesianPoint, h: float = DEFAULT_FD_STEP
) -> ConformalCheckResult:
    """Compare the horizontal metric with the target metric at chi(p).

    Both metrics are expressed in the shared basis (dS, dsigma) <->
    (drho, dphi), so proportionality is a pure matrix statement:
    H = lambda * diag(1, S^2) up to the reported residuals.
    """
    fld = ScalarField.from_map(spec)
    S0, gS, gsig = fd_modulus_phase_gradient(fld, p, h)
    gram = np.array([[gS @ gS, gS @ gsig], [gS @ gsig, gsig @ gsig]])
    H = np.linalg.inv(gram)
    T = target_metric(S0)
    lam = H[0, 0] / T[0, 0]
    if lam <= 0.0:
        raise DomainError(f"nonpositive scale factor {lam} at ({p.x}, {p.y}, {p.z})")
    offdiag = abs(H[0, 1]) / math.sqrt(H[0, 0] * H[1, 1])
    prop = abs(H[1, 1] / T[1, 1] - lam) / lam
    return ConformalCheckResult(
        scale=float(lam), offdiag_residual=float(offdiag), proportionality_residual=float(prop)
    )


@dataclass(frozen=True)
class GeometrySuiteResult:
    """Worst-case geometry residuals over a sample set."""

    samples_used: int
    samples_skipped: int
    max_vertical_ratio: float
    max_duality_error: float
    max_offdiag: float
    max_proportionality: float
    min_scale: float

    def to_dict(self) -> dict:
        return {
            "samples_used": self.samples_used,
            "samples_skipped": self.samples_skipped,
            "max_vertical_ratio": self.max_vertical_ratio,
            "max_duality_error": self.max_duality_error,
            "max_offdiag": self.max_offdiag,
            "max_proportionality": self.max_proportionality,
            "min_scale": self.min_scale,
        }


def run_geometry_suite(spec, sampling, h: float = DEFAULT_FD_STEP) -> GeometrySuiteResult:
    """Evaluate the splitting/duality/conformal checks over a sample set.

    Per point: the ratio of the finite-difference derivative of chi along
    the vertical direction to |grad chi| (zero for an exact fiber
    direction), the worst coframe-duality defect, and both conformal
    residuals.  Points whose stencil leaves the regular region are skipped
    and counted.
    """
    from .calculus import sample_points
    from .errors import StencilError
    from .hopf import gradient_at

    fld = ScalarField.from_map(spec)
    points, _ = sample_points(sampling)
    used = skipped = 0
    max_vert = max_dual = max_off = max_prop = 0.0
    min_scale = math.inf
    eye = np.eye(3)
    for p in points:
        try:
            e3 = vertical_field(spec, p)
            grad = gradient_at(spec, p)
            step = p.as_array()
            plus = CartesianPoint.from_array(step + h * e3)
            minus = CartesianPoint.from_array(step - h * e3)
            dchi = abs(fld(plus) - fld(minus)) / (2.0 * h)
            frame = split_frame(spec, p)
            dual = coframe(frame).as_matrix() @ frame.as_matrix().T
            check = conformal_check(spec, p, h)
        except (DomainError, StencilError):
            skipped += 1
            continue
        used += 1
        max_vert = max(max_vert, dchi / float(np.linalg.norm(grad)))
        max_dual = max(max_dual, float(np.max(np.abs(dual - eye))))
        max_off = max(max_off, check.offdiag_residual)
        max_prop = max(max_prop, check.proportionality_residual)
        min_scale = min(min_scale, check.scale)
    return GeometrySuiteResult(
        samples_used=used,
        samples_skipped=skipped,
        max_vertical_ratio=max_vert,
        max_duality_error=max_dual,
        max_offdiag=max_off,
        max_proportionality=max_prop,
        min_scale=min_scale,
    )


def conformal_scale_closed_form(spec: HopfMapSpec, p: CartesianPoint) -> float:
    """Closed-form prediction of the conformal scale factor at p.

    Substituting the closed-form profile into the horizontal-metric scale
    expression (and converting to the Euclidean-metric convention used here)
    gives lambda = t^2 / (q^2 f^2 (n^2 + m^2 t^2)) with t = sinh(eta).
    """
    from .hopf import profile_f

    t = to_toroidal(p)
    sh = math.sinh(t.eta)
    f = profile_f(spec, t.eta)
    return sh * sh / (
        t.q * t.q * f * f * (spec.n * spec.n + spec.m * spec.m * sh * sh)
    )
