"""Limit-law constants, AMSE and bandwidth rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, ZeroCurvature
from .kernels import (
    EPANECHNIKOV,
    PS1,
    PS2,
    PS3,
    EquivalentKernel,
    GFamily,
    MKernel,
    c_moments,
    c_moment,
    equivalent_kernel_poly,
    get_family,
    get_kernel,
    omega_system,
)

CHI_INTERIOR = 15.0 ** 0.2
CHI_BOUNDARY = 2.0 * CHI_INTERIOR


@dataclass(frozen=True)
class AsymptoticSpec:
    """Inputs to the limit laws at one evaluation point.

    ``L_derivs`` holds the true ``(L'(x), ..., L^(S+1)(x))``.
    """

    S: int
    z: float
    f_x: float
    L_derivs: Sequence[float]
    n: int
    h: float
    family: GFamily = PS1
    m: MKernel = EPANECHNIKOV

    def __post_init__(self):
        if not self.f_x > 0:
            raise ConfigurationError("true density must be positive")
        if not self.h > 0:
            raise ConfigurationError("bandwidth must be positive")
        if len(self.L_derivs) < self.S + 1:
            raise ConfigurationError(f"need {self.S + 1} log-density derivatives, got {len(self.L_derivs)}")
        object.__setattr__(self, "family", get_family(self.family))
        object.__setattr__(self, "m", get_kernel(self.m))

    @property
    def xi(self) -> float:
        """``sqrt(n h^(2S+3))``."""
        return math.sqrt(self.n * self.h ** (2 * self.S + 3))

    @property
    def beta_next(self) -> float:
        return float(self.L_derivs[self.S])


@dataclass(frozen=True)
class AsymptoticResult:
    """Limit-law summary; ``*_finite`` are on the scale of ``f_hat`` itself."""

    beta_bias: np.ndarray
    beta_cov: np.ndarray = field(repr=False)
    density_bias: float
    density_var: float
    density_bias_finite: float
    density_var_finite: float

    @property
    def density_amse(self) -> float:
        return self.density_bias_finite ** 2 + self.density_var_finite


def beta_asymptotics(spec: AsymptoticSpec) -> tuple[np.ndarray, np.ndarray]:
    """Leading bias and covariance of ``beta_hat`` at sample size ``n``, bandwidth ``h``.

    bias_s = h^(S+1-s) beta_{S+1} b_s and
    Cov_sj = [(Omega' V^-1 Omega)^-1]_sj / (f n h^(s+j+1)).
    """
    system = omega_system(spec.family, spec.S, float(spec.z))
    s = np.arange(1, spec.S + 1)
    bias = spec.h ** (spec.S + 1 - s) * spec.beta_next * system.b
    scale = spec.h ** (s[:, None] + s[None, :] + 1)
    cov = system.beta_cov / (spec.f_x * spec.n * scale)
    return bias, cov


def density_constants(m: MKernel, family: GFamily, S: int, z: float) -> tuple[float, float]:
    """Kernel-only parts of the density limit law.

    Returns ``(c_{m,S+1,z} - c_mz' b, int omega_z^2)``; the bias is
    ``f beta_{S+1} Xi`` times the first and the variance ``f`` times the second.
    """
    m, family = get_kernel(m), get_family(family)
    system = omega_system(family, S, float(z))
    bias_const = c_moment(m, S + 1, z) - float(np.dot(c_moments(m, S, z), system.b))
    return bias_const, equivalent_kernel_poly(m, family, S, float(z)).roughness()


def density_asymptotics(spec: AsymptoticSpec) -> tuple[float, float]:
    """``(B, V)`` of ``sqrt(nh) (f_hat - f) -> N(B, V)``."""
    bias_const, rough = density_constants(spec.m, spec.family, spec.S, spec.z)
    return spec.f_x * spec.beta_next * spec.xi * bias_const, spec.f_x * rough


def asymptotics(spec: AsymptoticSpec) -> AsymptoticResult:
    bias, cov = beta_asymptotics(spec)
    B, V = density_asymptotics(spec)
    nh = spec.n * spec.h
    return AsymptoticResult(bias, cov, B, V, B / math.sqrt(nh), V / nh)


# ---------------------------------------------------------------------------
# AMSE and bandwidths


def amse_bracket(chi: float, kernel: EquivalentKernel) -> float:
    """``chi^4 (int omega t^2 / 2)^2 + chi^-1 int omega^2`` for a second-order ``omega``."""
    if not chi > 0:
        raise ConfigurationError("chi must be positive")
    mu = kernel.moment(2) / 2.0
    return chi**4 * mu**2 + kernel.roughness() / chi


def amse(chi: float, kernel: EquivalentKernel, f_x: float, Lpp_x: float, n: int) -> float:
    """AMSE of ``f_hat`` with ``h = chi (n f L''^2)^(-1/5)``, S=1.

    The bracket multiplies ``f^(6/5) |L''|^(2/5) n^(-4/5)``.
    """
    return amse_bracket(chi, kernel) * f_x ** 1.2 * abs(Lpp_x) ** 0.4 * n ** -0.8


def optimal_chi(kernel: EquivalentKernel) -> float:
    """Stationary point ``(R / (4 mu^2))^(1/5)`` of the bracket; ``inf`` for zero bias (``|mu| <= 1e-12``)."""
    mu = kernel.moment(2) / 2.0
    if abs(mu) <= 1e-12:
        return math.inf
    return (kernel.roughness() / (4.0 * mu**2)) ** 0.2


def optimal_bandwidth(chi: float, f_x: float, Lpp_x: float, n: int) -> float:
    """``h = chi (n f(x) L''(x)^2)^(-1/5)``."""
    if not f_x > 0:
        raise ConfigurationError("density must be positive")
    if Lpp_x == 0:
        raise ZeroCurvature("L''(x) = 0: the optimal bandwidth is unbounded; supply a cap")
    return chi * (n * f_x * Lpp_x**2) ** -0.2


def variance_matching_factor(m: MKernel, family: GFamily, reference: GFamily, S: int = 1,
                             z: float = 0.0) -> float:
    """Bandwidth ratio giving ``family`` the same asymptotic variance as ``reference``.

    Variance is ``f int omega^2 / (n h)``, so the ratio is the ratio of the
    roughnesses.
    """
    r_new = equivalent_kernel_poly(get_kernel(m), get_family(family), S, float(z)).roughness()
    r_ref = equivalent_kernel_poly(get_kernel(m), get_family(reference), S, float(z)).roughness()
    return r_new / r_ref


PS3_BOUNDARY_FACTOR = variance_matching_factor(EPANECHNIKOV, PS3, PS2)


def boundary_chi(family: GFamily, m: MKernel = EPANECHNIKOV) -> float:
    """AMSE-optimal ``chi`` at ``z = 0`` for ``(family, m)`` with S=1.

    Equals ``2 * 15^(1/5)`` for PS2; zero-bias families have no finite optimum
    and use the variance-matching rule instead.
    """
    family, m = get_family(family), get_kernel(m)
    chi = optimal_chi(equivalent_kernel_poly(m, family, 1, 0.0))
    if math.isinf(chi):
        return PS3_BOUNDARY_FACTOR * CHI_BOUNDARY if family == PS3 else chi
    return chi


def bandwidth_interpolate(x: float, h0: float, h1: float) -> float:
    """``h0 (1 - min(x/h1, 1)) + h1 min(x/h1, 1)``."""
    if not (h0 > 0 and h1 > 0):
        raise ConfigurationError("bandwidths must be positive")
    w = min(x / h1, 1.0)
    return h0 * (1.0 - w) + h1 * w
