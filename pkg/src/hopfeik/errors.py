"""Exception types shared across the package."""


class HopfeikError(Exception):
    """Base class for all package-specific errors."""


class DomainError(HopfeikError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class DegeneratePointError(DomainError):
    """q = cosh(eta) - cos(xi) vanished: the chart degenerates (spatial infinity)."""


class FocalCircleError(DomainError):
    """Point is on, or too close to, the focal circle {z = 0, x^2 + y^2 = 1}."""


class AxisDegeneracyError(DomainError):
    """Point is on the z-axis, where the azimuth phi is undefined."""


class ZeroModulusError(DomainError):
    """Field modulus vanishes, so the phase is undefined."""


class PoleError(DomainError):
    """Target-map evaluation hit a registered pole."""


class InversionSingularityError(DomainError):
    """Sphere inversion applied at its singular point (the origin)."""


class StencilError(HopfeikError):
    """A finite-difference stencil touched a singular locus."""


class SamplingError(HopfeikError):
    """Sampling produced no usable points (all excluded or empty region)."""


class TraceError(HopfeikError):
    """Fiber tracing failed."""


class NoClosureError(TraceError):
    """Tracer exhausted its step budget without returning to the seed."""


class CorrectorError(TraceError):
    """Level-set projection failed to converge."""


class LinkingConditionError(HopfeikError):
    """Curves too close together for a well-conditioned linking integral."""
