"""Toroidal Hopf maps as static solutions of the complex eikonal equation.

The package constructs the winding-(m, n) family of torus-shaped Hopf maps,
verifies the eikonal property through finite-difference residual scans,
confirms the Hopf index m*n by tracing level curves and evaluating the
Gauss linking integral, and checks the conformal-submersion structure of
the underlying fibration numerically.
"""

from .coords import (
    CartesianPoint,
    Frame,
    ToroidalPoint,
    scale_factor,
    to_cartesian,
    to_toroidal,
    toroidal_frame,
)
from .hopf import (
    HopfMapSpec,
    evaluate,
    gradient_analytic,
    ode_rhs,
    profile_f,
    profile_log_deriv,
)
from .calculus import (
    BoxRegion,
    ResidualReport,
    SamplingSpec,
    ScalarField,
    TorusRegion,
    control_field,
    eikonal_residual,
    fd_gradient,
    residual_scan,
    split_residuals,
)
from .geometry import (
    ConformalCheckResult,
    CoFrame,
    SplitFrame,
    conformal_check,
    coframe,
    horizontal_metric,
    run_geometry_suite,
    split_frame,
    target_metric,
    vertical_field,
)
from .fibers import (
    Fiber,
    LinkingResult,
    TraceOptions,
    component_count,
    fiber_tangent,
    gauss_linking,
    hopf_index,
    seed_on_level_set,
    trace_fiber,
    trace_level_set,
)
from .symmetry import (
    BaseConformalMap,
    Dilation,
    Inversion,
    Rotation,
    TargetMap,
    Translation,
    compose_target,
    transform_base,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "CartesianPoint",
    "ToroidalPoint",
    "Frame",
    "to_cartesian",
    "to_toroidal",
    "scale_factor",
    "toroidal_frame",
    "HopfMapSpec",
    "profile_f",
    "profile_log_deriv",
    "ode_rhs",
    "evaluate",
    "gradient_analytic",
    "ScalarField",
    "SamplingSpec",
    "BoxRegion",
    "TorusRegion",
    "ResidualReport",
    "control_field",
    "fd_gradient",
    "eikonal_residual",
    "split_residuals",
    "residual_scan",
    "SplitFrame",
    "CoFrame",
    "ConformalCheckResult",
    "vertical_field",
    "split_frame",
    "coframe",
    "horizontal_metric",
    "target_metric",
    "conformal_check",
    "run_geometry_suite",
    "Fiber",
    "TraceOptions",
    "LinkingResult",
    "fiber_tangent",
    "seed_on_level_set",
    "component_count",
    "trace_fiber",
    "trace_level_set",
    "gauss_linking",
    "hopf_index",
    "TargetMap",
    "BaseConformalMap",
    "Translation",
    "Rotation",
    "Dilation",
    "Inversion",
    "compose_target",
    "transform_base",
    "errors",
    "__version__",
]
