"""Fiber tracing, Gauss linking numbers, and the Hopf index.

Level curves of the maps are closed curves on the coordinate tori
eta = const; a level set splits into gcd(|m|, |n|) connected components.
The tracer integrates the unit fiber direction with an embedded
Runge-Kutta 4(5) pair and projects back onto the level set after every
accepted step, so the curve cannot drift off its torus.  Winding
accumulators for xi and phi double as the closure test: a fiber is closed
only when it has returned to its seed *and* both accumulated angles are
integer multiples of 2*pi, which protects multi-winding fibers that pass
near their seed before closing.

The linking number of two closed polylines is computed with the exact
per-segment-pair solid-angle formula (each pair contributes the signed
spherical area of the quadrilateral spanned by the four difference
vectors), so the result is the exact linking integer of the polylines up to
roundoff; a midpoint quadrature of the Gauss integral is available for
cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calculus import _chunked_map, _worker_count
from .coords import CartesianPoint, ToroidalPoint, to_cartesian
from .errors import (
    AxisDegeneracyError,
    CorrectorError,
    DomainError,
    FocalCircleError,
    LinkingConditionError,
    NoClosureError,
)
from .hopf import HopfMapSpec, profile_log

TWO_PI = 2.0 * math.pi

# Cash-Karp embedded 4(5) coefficients.
_CK_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (3 / 10, -9 / 10, 6 / 5),
    (-11 / 54, 5 / 2, -70 / 27, 35 / 27),
    (1631 / 55296, 175 / 512, 575 / 13824, 44275 / 110592, 253 / 4096),
)
_CK_B5 = (37 / 378, 0.0, 250 / 621, 125 / 594, 0.0, 512 / 1771)
_CK_B4 = (2825 / 27648, 0.0, 18575 / 48384, 13525 / 55296, 277 / 14336, 1 / 4)


@dataclass(frozen=True)
class TraceOptions:
    """Tracer controls; all lengths in units of the focal-circle radius.

    initial_step / max_step default to fractions of the minor circumference
    2*pi/sinh(eta0) of the seed torus.
    """

    initial_step: float | None = None
    error_tol: float = 1e-9
    closure_tol: float = 1e-7
    max_steps: int = 200_000
    correction_tol: float = 1e-10
    max_step: float | None = None

    def __post_init__(self):
        for name in ("error_tol", "closure_tol", "correction_tol"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"{name} must be positive")
        if self.max_steps <= 0:
            raise DomainError("max_steps must be positive")
        if self.initial_step is not None and self.initial_step <= 0.0:
            raise DomainError("initial_step must be positive")
        if self.max_step is not None and self.max_step <= 0.0:
            raise DomainError("max_step must be positive")


@dataclass(frozen=True)
class Fiber:
    """A traced level-curve component as a closed polyline.

    Windings are the accumulated xi/phi angles in units of 2*pi (signed;
    integers to ~1e-3 when closed).  level is the complex level value
    chi = f(eta0) e^{i sigma0} shared by every point of the curve.
    """

    points: np.ndarray
    closed: bool
    winding_xi: float
    winding_phi: float
    arc_length: float
    level: complex
    eta: float
    sigma: float

    def max_segment(self) -> float:
        d = np.diff(self.points, axis=0)
        return float(np.max(np.linalg.norm(d, axis=1)))

    def closed_polyline(self) -> np.ndarray:
        """Vertices without the duplicated endpoint; the cycle is implicit."""
        pts = self.points
        if len(pts) > 1 and np.linalg.norm(pts[0] - pts[-1]) < 1e-9:
            return pts[:-1]
        return pts


@dataclass(frozen=True)
class LinkingResult:
    """Raw Gauss integral, its nearest integer, and the rounding deviation."""

    raw: float
    rounded: int
    deviation: float

    @property
    def reliable(self) -> bool:
        return self.deviation < 0.05


def component_count(spec: HopfMapSpec) -> int:
    """Number of connected components of one level set: gcd(|m|, |n|)."""
    return math.gcd(abs(spec.m), abs(spec.n))


def seed_on_level_set(spec: HopfMapSpec, eta0: float, sigma0: float) -> CartesianPoint:
    """Point with toroidal coordinates (eta0, xi = sigma0/m, phi = 0).

    By construction m*xi + n*phi = sigma0 (mod 2*pi), so the point lies on
    the level set of phase sigma0 on the torus eta = eta0.
    """
    if eta0 <= 0.0:
        raise DomainError(f"eta0 must be positive, got {eta0}")
    return to_cartesian(ToroidalPoint(eta0, sigma0 / spec.m, 0.0))


def component_seeds(spec: HopfMapSpec, eta0: float, sigma0: float) -> list[CartesianPoint]:
    """One seed per connected component of the level set {sigma = sigma0}."""
    g = component_count(spec)
    return [
        seed_on_level_set(spec, eta0, sigma0 + TWO_PI * k) for k in range(g)
    ]


# ---------------------------------------------------------------------------
# Scalar geometry helpers (hot path: plain floats, no array allocation)


def _geom(x: float, y: float, z: float):
    """(rho, eta, xi, phi, q, sh, ch, cxi, sxi, cphi, sphi) at a point."""
    rho = math.hypot(x, y)
    if rho == 0.0:
        raise AxisDegeneracyError("fiber direction undefined on the z-axis")
    d1 = math.hypot(rho + 1.0, z)
    d2 = math.hypot(rho - 1.0, z)
    if d2 == 0.0:
        raise FocalCircleError(f"({x}, {y}, {z}) lies on the focal circle")
    r = d1 / d2
    ch = 0.5 * (r + 1.0 / r)
    sh = 0.5 * (r - 1.0 / r)
    if sh < 1e-14:
        raise AxisDegeneracyError("fiber direction undefined on the z-axis")
    dd = d1 * d2
    cxi = (rho * rho + z * z - 1.0) / dd
    sxi = 2.0 * z / dd
    return (
        rho,
        math.log(r),
        math.atan2(sxi, cxi) % TWO_PI,
        math.atan2(y, x) % TWO_PI,
        ch - cxi,
        sh,
        ch,
        cxi,
        sxi,
        x / rho,
        y / rho,
    )


def _tangent_xyz(m: int, n: int, x: float, y: float, z: float):
    """Unit tangent of the fiber through (x, y, z), as a float triple.

    Proportional to grad S x grad sigma = (positive) * (m e_phi -
    (n/sinh eta) e_xi); for m, n > 0 the phi angle accumulates positively.
    """
    rho = math.hypot(x, y)
    if rho == 0.0:
        raise AxisDegeneracyError("fiber direction undefined on the z-axis")
    d1 = math.hypot(rho + 1.0, z)
    d2 = math.hypot(rho - 1.0, z)
    if d2 == 0.0:
        raise FocalCircleError(f"({x}, {y}, {z}) lies on the focal circle")
    r = d1 / d2
    ch = 0.5 * (r + 1.0 / r)
    sh = 0.5 * (r - 1.0 / r)
    if sh < 1e-14:
        raise AxisDegeneracyError("fiber direction undefined on the z-axis")
    dd = d1 * d2
    cxi = (rho * rho + z * z - 1.0) / dd
    sxi = 2.0 * z / dd
    q = ch - cxi
    cphi = x / rho
    sphi = y / rho
    k = n * sxi / q
    vx = -m * sphi + k * cphi
    vy = m * cphi + k * sphi
    vz = -n * (ch * cxi - 1.0) / (sh * q)
    inv = 1.0 / math.sqrt(vx * vx + vy * vy + vz * vz)
    return vx * inv, vy * inv, vz * inv


def fiber_tangent(spec: HopfMapSpec, p: CartesianPoint) -> np.ndarray:
    """Unit vector along the fiber through p (oriented: positive d(phi) for m, n > 0)."""
    return np.array(_tangent_xyz(spec.m, spec.n, p.x, p.y, p.z))


def _rk_stages(m, n, x, y, z, h):
    """Cash-Karp stages; returns (5th-order point, error estimate)."""
    k = [(0.0, 0.0, 0.0)] * 6
    k[0] = _tangent_xyz(m, n, x, y, z)
    for i in range(1, 6):
        ax = ay = az = 0.0
        for j, a in enumerate(_CK_A[i]):
            ax += a * k[j][0]
            ay += a * k[j][1]
            az += a * k[j][2]
        k[i] = _tangent_xyz(m, n, x + h * ax, y + h * ay, z + h * az)
    x5 = y5 = z5 = 0.0
    ex = ey = ez = 0.0
    for j in range(6):
        x5 += _CK_B5[j] * k[j][0]
        y5 += _CK_B5[j] * k[j][1]
        z5 += _CK_B5[j] * k[j][2]
        ex += (_CK_B5[j] - _CK_B4[j]) * k[j][0]
        ey += (_CK_B5[j] - _CK_B4[j]) * k[j][1]
        ez += (_CK_B5[j] - _CK_B4[j]) * k[j][2]
    err = abs(h) * math.sqrt(ex * ex + ey * ey + ez * ez)
    return (x + h * x5, y + h * y5, z + h * z5), err


def _rk4_fixed(m, n, x, y, z, h):
    """One classic RK4 step (used only for the closure landing)."""
    k1 = _tangent_xyz(m, n, x, y, z)
    k2 = _tangent_xyz(m, n, x + 0.5 * h * k1[0], y + 0.5 * h * k1[1], z + 0.5 * h * k1[2])
    k3 = _tangent_xyz(m, n, x + 0.5 * h * k2[0], y + 0.5 * h * k2[1], z + 0.5 * h * k2[2])
    k4 = _tangent_xyz(m, n, x + h * k3[0], y + h * k3[1], z + h * k3[2])
    return (
        x + h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0,
        y + h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0,
        z + h * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]) / 6.0,
    )


def _wrap_pi(a: float) -> float:
    """Reduce an angle difference to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def _project_level(spec, x, y, z, lnf0, sigma0, tol, max_iter=10):
    """Newton projection onto the level set {ln f(eta) = lnf0, sigma = sigma0}.

    Moves only within span(grad S, grad sigma): corrections along e_eta fix
    the modulus, corrections along m e_xi + (n/sinh eta) e_phi fix the
    phase.  Converges quadratically from the O(step^5) drift of a single
    integrator step.
    """
    m, n = spec.m, spec.n
    prev = math.inf
    for _ in range(max_iter):
        rho, eta, xi, phi, q, sh, ch, cxi, sxi, cphi, sphi = _geom(x, y, z)
        err_f = profile_log(spec, eta) - lnf0
        err_s = _wrap_pi(m * xi + n * phi - sigma0)
        miss = max(abs(err_f), abs(err_s))
        if miss <= tol:
            return x, y, z
        if miss > 4.0 * prev:
            raise CorrectorError(
                f"level-set projection diverging at ({x}, {y}, {z}): miss={miss:.3e}"
            )
        prev = max(miss, 1e-300)
        w = math.sqrt(m * m + n * n / (sh * sh))
        # modulus correction along e_eta
        a = (1.0 - ch * cxi) / q
        step_eta = -err_f / (w * q)
        dx = step_eta * cphi * a
        dy = step_eta * sphi * a
        dz = step_eta * (-sxi * sh / q)
        # phase correction along (m e_xi + (n/sh) e_phi) / (q w^2)
        c = -err_s / (q * w * w)
        exi_x = -sh * sxi * cphi / q
        exi_y = -sh * sxi * sphi / q
        exi_z = (ch * cxi - 1.0) / q
        dx += c * (m * exi_x + (n / sh) * (-sphi))
        dy += c * (m * exi_y + (n / sh) * cphi)
        dz += c * (m * exi_z)
        x, y, z = x + dx, y + dy, z + dz
    raise CorrectorError(
        f"level-set projection did not converge to {tol:.1e} within {max_iter} iterations"
    )


def trace_fiber(
    spec: HopfMapSpec, seed: CartesianPoint, opts: TraceOptions | None = None
) -> Fiber:
    """Trace the closed fiber through seed.

    Adaptive Cash-Karp 4(5) steps along the unit fiber direction, each
    followed by a Newton projection back onto the level set of the seed.
    Terminates when the curve has returned within closure_tol of the seed
    with integer winding accumulators; raises NoClosureError at the step
    budget and CorrectorError if the projection stalls.
    """
    if opts is None:
        opts = TraceOptions()
    m, n = spec.m, spec.n
    x, y, z = seed.x, seed.y, seed.z
    _, eta0, xi0, phi0, _, sh0, _, _, _, _, _ = _geom(x, y, z)
    if eta0 < 1e-6:
        raise DomainError(f"seed too close to the z-axis (eta={eta0:.2e})")
    lnf0 = profile_log(spec, eta0)
    sigma0 = (m * xi0 + n * phi0) % TWO_PI
    level = math.exp(lnf0) * complex(math.cos(sigma0), math.sin(sigma0))

    minor = TWO_PI / sh0
    h_max = opts.max_step if opts.max_step is not None else min(0.02 * minor, 0.015)
    h = min(opts.initial_step or 1e-3 * minor, h_max)
    h_min = 1e-12

    pts = [(x, y, z)]
    prev_xi, prev_phi = xi0, phi0
    wind_xi = 0.0   # accumulated xi angle, radians
    wind_phi = 0.0
    arc = 0.0
    sx, sy, sz = x, y, z  # seed copy
    cooldown = 0

    def book(nx, ny, nz):
        """Advance bookkeeping to a new (already projected) position."""
        nonlocal x, y, z, prev_xi, prev_phi, wind_xi, wind_phi, arc
        _, _, xi, phi, _, _, _, _, _, _, _ = _geom(nx, ny, nz)
        wind_xi += _wrap_pi(xi - prev_xi)
        wind_phi += _wrap_pi(phi - prev_phi)
        prev_xi, prev_phi = xi, phi
        arc += math.dist((x, y, z), (nx, ny, nz))
        x, y, z = nx, ny, nz
        pts.append((x, y, z))

    def windings_integer(slack: float) -> bool:
        wx, wp = wind_xi / TWO_PI, wind_phi / TWO_PI
        if abs(wx) + abs(wp) < 0.5:
            return False
        return abs(wx - round(wx)) < slack and abs(wp - round(wp)) < slack

    def close_out() -> Fiber:
        # exact closure on the seed; the residual hop is within closure_tol
        book(sx, sy, sz)
        return Fiber(
            points=np.array(pts),
            closed=True,
            winding_xi=wind_xi / TWO_PI,
            winding_phi=wind_phi / TWO_PI,
            arc_length=arc,
            level=level,
            eta=eta0,
            sigma=sigma0,
        )

    def try_land() -> bool:
        """Walk along the fiber onto the seed; True on closure."""
        for k in range(30):
            dist = math.dist((x, y, z), (sx, sy, sz))
            if dist <= opts.closure_tol:
                return True
            tx, ty, tz = _tangent_xyz(m, n, x, y, z)
            ds = (sx - x) * tx + (sy - y) * ty + (sz - z) * tz
            if abs(ds) < 0.25 * dist and k > 2:
                return False  # approach is mostly transverse: near pass, not closure
            nx, ny, nz = _rk4_fixed(m, n, x, y, z, ds)
            nx, ny, nz = _project_level(
                spec, nx, ny, nz, lnf0, sigma0, opts.correction_tol
            )
            book(nx, ny, nz)
        return False

    steps = 0
    while steps < opts.max_steps:
        steps += 1
        (tx_, ty_, tz_), err = _rk_stages(m, n, x, y, z, h)
        if err > opts.error_tol:
            h = max(h_min, 0.9 * h * (opts.error_tol / err) ** 0.25)
            if h <= h_min:
                raise CorrectorError("step size underflow during tracing")
            continue
        nx, ny, nz = _project_level(spec, tx_, ty_, tz_, lnf0, sigma0, opts.correction_tol)
        h_used = h
        book(nx, ny, nz)
        if cooldown > 0:
            cooldown -= 1
        elif windings_integer(0.05):
            if math.dist((x, y, z), (sx, sy, sz)) < 1.5 * h_used + opts.closure_tol:
                if try_land():
                    return close_out()
                cooldown = 25
        if err > 0.0:
            h = min(h_max, 0.9 * h * (opts.error_tol / err) ** 0.2)
        else:
            h = h_max
    raise NoClosureError(
        f"fiber of {spec.label} from ({sx}, {sy}, {sz}) did not close within "
        f"{opts.max_steps} steps (windings xi={wind_xi / TWO_PI:.3f}, "
        f"phi={wind_phi / TWO_PI:.3f})"
    )


def trace_level_set(
    spec: HopfMapSpec,
    eta0: float,
    sigma0: float,
    opts: TraceOptions | None = None,
) -> list[Fiber]:
    """Trace every connected component of the level set {sigma = sigma0} on eta = eta0."""
    return [trace_fiber(spec, s, opts) for s in component_seeds(spec, eta0, sigma0)]


# ---------------------------------------------------------------------------
# Gauss linking integral


def _as_cycle(curve) -> np.ndarray:
    """Vertex array of a closed polyline, without a duplicated endpoint."""
    if isinstance(curve, Fiber):
        if not curve.closed:
            raise DomainError("linking requires closed fibers")
        pts = curve.closed_polyline()
    else:
        pts = np.asarray(curve, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
            raise DomainError("polyline must be an (N, 3) array with N >= 3")
        if np.linalg.norm(pts[0] - pts[-1]) < 1e-12:
            pts = pts[:-1]
    return pts


def _min_point_distance(a: np.ndarray, b: np.ndarray, chunk: int = 512) -> float:
    best = math.inf
    for i in range(0, len(a), chunk):
        d = a[i : i + chunk, None, :] - b[None, :, :]
        best = min(best, float(np.min(np.einsum("ijk,ijk->ij", d, d))))
    return math.sqrt(best)


def gauss_linking(
    a,
    b,
    *,
    method: str = "solid-angle",
    min_separation_factor: float = 10.0,
    workers: int | None = None,
) -> LinkingResult:
    """Linking number of two disjoint closed polylines.

    method "solid-angle" sums the exact signed spherical area contributed by
    each segment pair and is exact for the polylines up to roundoff;
    "midpoint" applies midpoint quadrature to the Gauss double integral and
    converges only with refinement.  Curves closer than
    min_separation_factor times the longest segment are rejected as
    ill-conditioned.  Segment-pair blocks may be evaluated concurrently;
    block sums are recombined with compensated summation in a fixed order,
    so the result does not depend on the worker count.
    """
    pa = _as_cycle(a)
    pb = _as_cycle(b)
    seg_a = np.linalg.norm(np.roll(pa, -1, axis=0) - pa, axis=1)
    seg_b = np.linalg.norm(np.roll(pb, -1, axis=0) - pb, axis=1)
    max_seg = max(float(np.max(seg_a)), float(np.max(seg_b)))
    min_dist = _min_point_distance(pa, pb)
    if min_dist <= min_separation_factor * max_seg:
        raise LinkingConditionError(
            f"curves too close for a reliable linking integral: min distance "
            f"{min_dist:.3e} <= {min_separation_factor} x max segment {max_seg:.3e}"
        )

    if method == "solid-angle":
        raw = _linking_solid_angle(pa, pb, workers)
    elif method == "midpoint":
        raw = _linking_midpoint(pa, pb, workers)
    else:
        raise DomainError(f"unknown linking method {method!r}")
    rounded = round(raw)
    return LinkingResult(raw=raw, rounded=int(rounded), deviation=abs(raw - rounded))


def _linking_solid_angle(pa: np.ndarray, pb: np.ndarray, workers: int | None) -> float:
    b0 = pb
    b1 = np.roll(pb, -1, axis=0)
    a1 = np.roll(pa, -1, axis=0)

    def row(i: int) -> float:
        # difference vectors from the two endpoints of segment i of curve A
        # to the two endpoints of every segment of curve B
        a = pa[i] - b0
        b = pa[i] - b1
        c = a1[i] - b1
        d = a1[i] - b0
        an = np.linalg.norm(a, axis=1)
        bn = np.linalg.norm(b, axis=1)
        cn = np.linalg.norm(c, axis=1)
        dn = np.linalg.norm(d, axis=1)
        p = np.einsum("ij,ij->i", a, np.cross(b, c))
        ab = np.einsum("ij,ij->i", a, b)
        bc = np.einsum("ij,ij->i", b, c)
        ca = np.einsum("ij,ij->i", c, a)
        ad = np.einsum("ij,ij->i", a, d)
        dc = np.einsum("ij,ij->i", d, c)
        den1 = an * bn * cn + ab * cn + bc * an + ca * bn
        den2 = an * dn * cn + ad * cn + dc * an + ca * dn
        return float(np.sum(np.arctan2(p, den1) + np.arctan2(p, den2)))

    rows = _chunked_map(row, list(range(len(pa))), _worker_count(workers))
    return math.fsum(rows) / TWO_PI


def _linking_midpoint(pa: np.ndarray, pb: np.ndarray, workers: int | None) -> float:
    da = np.roll(pa, -1, axis=0) - pa
    ma = pa + 0.5 * da
    db = np.roll(pb, -1, axis=0) - pb
    mb = pb + 0.5 * db

    def row(i: int) -> float:
        r = ma[i] - mb
        r3 = np.sum(r * r, axis=1) ** 1.5
        num = np.einsum("ij,ij->i", np.cross(da[i][None, :], db), r)
        return float(np.sum(num / r3))

    rows = _chunked_map(row, list(range(len(ma))), _worker_count(workers))
    return math.fsum(rows) / (2.0 * TWO_PI)


def hopf_index(
    spec: HopfMapSpec,
    opts: TraceOptions | None = None,
    *,
    eta_a: float = 0.6,
    eta_b: float = 1.2,
    sigma_a: float = 0.0,
    sigma_b: float = 0.5 * math.pi,
    method: str = "solid-angle",
) -> LinkingResult:
    """Hopf index as the linking number of two full level sets.

    One component of each level set is traced; the remaining components are
    rigid copies, and all gcd^2 component pairs link equally, so the full
    linking number is the per-component value times gcd(|m|, |n|)^2.  The
    signed result equals m*n in this package's orientation convention.
    """
    if eta_a == eta_b:
        raise DomainError("the two level sets must sit on distinct tori")
    g = component_count(spec)
    fiber_a = trace_fiber(spec, seed_on_level_set(spec, eta_a, sigma_a), opts)
    fiber_b = trace_fiber(spec, seed_on_level_set(spec, eta_b, sigma_b), opts)
    per = gauss_linking(fiber_a, fiber_b, method=method)
    raw = per.raw * g * g
    rounded = round(raw)
    return LinkingResult(raw=raw, rounded=int(rounded), deviation=abs(raw - rounded))
