"""Local log-polynomial density estimation with boundary correction."""

from .asymptotics import (
    CHI_BOUNDARY,
    CHI_INTERIOR,
    PS3_BOUNDARY_FACTOR,
    AsymptoticSpec,
    amse,
    amse_bracket,
    asymptotics,
    bandwidth_interpolate,
    boundary_chi,
    optimal_bandwidth,
    optimal_chi,
)
from .designs import Design
from .errors import LogDensError
from .estimator import (
    EvalRequest,
    Sample,
    estimate_beta,
    estimate_curve,
    estimate_density,
    estimate_hazard,
    estimate_logdensity,
)
from .kernels import (
    EPANECHNIKOV,
    PS1,
    PS2,
    PS3,
    UNIFORM,
    custom_family,
    custom_kernel,
    equivalent_kernel_poly,
    omega_system,
)
from .simulation import McConfig, run_monte_carlo, summarize

__version__ = "0.1.0"

__all__ = [
    "CHI_BOUNDARY", "CHI_INTERIOR", "PS3_BOUNDARY_FACTOR", "AsymptoticSpec", "amse",
    "amse_bracket", "asymptotics", "bandwidth_interpolate", "boundary_chi", "optimal_bandwidth",
    "optimal_chi", "Design", "LogDensError", "EvalRequest", "Sample", "estimate_beta",
    "estimate_curve", "estimate_density", "estimate_hazard", "estimate_logdensity",
    "EPANECHNIKOV", "PS1", "PS2", "PS3", "UNIFORM", "custom_family", "custom_kernel",
    "equivalent_kernel_poly", "omega_system", "McConfig", "run_monte_carlo", "summarize",
]
