"""Point estimators: log-density derivatives, density, log-density, hazard.

The derivative vector solves the local moment system

    sum_i g'(t_i) = sum_s (beta_s h^s) * B[:, s],
    B[j, s] = -sum_i g_j(t_i) t_i^(s-1) / (s-1)!,     t_i = (x_i - x) / h,

over observations in the window ``[x - z h, x + h]``.  Working with
``delta_s = beta_s h^s`` keeps the system well scaled for any ``h``.  The
density is the ratio of a boundary-kernel numerator and the integral of
``m_z(t) exp(sum_s delta_s t^s / s!)`` over ``[-z, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    EmptyWindow,
    LogDensError,
    MethodUnsupported,
    SingularSystem,
    ZeroDensity,
    ZeroSurvivor,
)
from .kernels import (
    EPANECHNIKOV,
    PS1,
    GFamily,
    MKernel,
    OmegaSystem,
    boundary_ratio,
    c_moment,
    epanechnikov_nu,
    get_family,
    get_kernel,
    omega_system,
)
from .quadrature import adaptive_gauss_legendre

DENOM_METHODS = ("auto", "exact", "quad", "bell")

# |beta_1 h| below which the closed-form denominator switches to its power series
SERIES_SWITCH = 0.5
SINGULAR_COND = 1e12


class Sample:
    """Sorted, read-only observations on ``[lower, inf)``."""

    __slots__ = ("values", "lower")

    def __init__(self, data, lower: float = 0.0):
        values = np.sort(np.asarray(data, dtype=float).ravel())
        if values.size == 0:
            raise ConfigurationError("sample is empty")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("sample contains non-finite values")
        if values[0] < lower:
            raise ConfigurationError(f"sample has values below the support bound {lower}")
        values.setflags(write=False)
        self.values = values
        self.lower = float(lower)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"Sample(n={self.n}, lower={self.lower})"

    def window(self, lo: float, hi: float) -> np.ndarray:
        """Observations in the closed interval ``[lo, hi]``."""
        i = np.searchsorted(self.values, lo, side="left")
        k = np.searchsorted(self.values, hi, side="right")
        return self.values[i:k]

    def survivor(self, x: float) -> float:
        """Empirical survivor ``#{x_i > x} / n``."""
        return (self.n - np.searchsorted(self.values, x, side="right")) / self.n

    def ecdf_at_points(self) -> np.ndarray:
        """Right-continuous empirical CDF evaluated at each (sorted) observation."""
        return np.searchsorted(self.values, self.values, side="right") / self.n


@dataclass(frozen=True)
class EvalRequest:
    x: float
    h: float
    S: int = 1
    family: GFamily = PS1
    m: MKernel = EPANECHNIKOV
    denom: str = "auto"

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise ConfigurationError(f"bandwidth must be positive, got {self.h!r}")
        if not np.isfinite(self.x):
            raise ConfigurationError(f"evaluation point must be finite, got {self.x!r}")
        if int(self.S) != self.S or self.S < 1:
            raise ConfigurationError(f"order S must be an integer >= 1, got {self.S!r}")
        if self.denom not in DENOM_METHODS:
            raise ConfigurationError(f"denominator method must be one of {DENOM_METHODS}")
        object.__setattr__(self, "family", get_family(self.family))
        object.__setattr__(self, "m", get_kernel(self.m))

    def z(self, lower: float = 0.0) -> float:
        return boundary_ratio(self.x, self.h, lower)


@dataclass(frozen=True)
class BetaEstimate:
    beta: np.ndarray
    h: float
    z: float
    n_window: int
    cond: float

    @property
    def scaled(self) -> np.ndarray:
        """``beta_s h^s``, the coefficients of the local polynomial in ``t``."""
        return self.beta * self.h ** np.arange(1, self.beta.size + 1)


@dataclass(frozen=True)
class DensityEstimate:
    x: float
    h: float
    z: float
    f_hat: float
    L_hat: float | None
    f_prime_hat: float
    beta: BetaEstimate | None = field(default=None, repr=False)
    n_window: int = 0
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status in ("ok", "empty_window")


# ---------------------------------------------------------------------------
# derivative system


@lru_cache(maxsize=1024)
def _factorials(S: int) -> np.ndarray:
    return np.array([factorial(s) for s in range(S + 1)], dtype=float)


def _solve_beta(t: np.ndarray, system: OmegaSystem, h: float) -> tuple[np.ndarray, float]:
    S = system.S
    G = np.array([g(t) for g in system.g])           # (S, k)
    Gp = np.array([gp(t) for gp in system.g_prime])  # (S, k)
    powers = t[None, :] ** np.arange(S)[:, None] / _factorials(S)[:S, None]  # (S, k)
    B = -G @ powers.T
    a = Gp.sum(axis=1)
    if S == 1:
        denom = B[0, 0]
        cond = 1.0 if denom != 0 else math.inf
        if denom == 0 or not np.isfinite(denom):
            raise SingularSystem("moment system is singular (all window mass at the window edges)")
        delta = a / denom
    else:
        cond = float(np.linalg.cond(B))
        if not np.isfinite(cond) or cond > SINGULAR_COND:
            raise SingularSystem(f"moment system is numerically singular (cond={cond:.3g})")
        delta = np.linalg.solve(B, a)
    beta = delta / h ** np.arange(1, S + 1)
    return beta, cond


def _window_t(sample: Sample, x: float, h: float, z: float) -> np.ndarray:
    w = sample.window(x - z * h, x + h)
    return (w - x) / h


def estimate_beta(sample: Sample, req: EvalRequest) -> BetaEstimate:
    """Solve the local moment system for ``(L'(x), ..., L^(S)(x))``.

    Raises :class:`EmptyWindow` when no observation lies in the window and
    :class:`SingularSystem` when the system cannot be solved.
    """
    z = req.z(sample.lower)
    t = _window_t(sample, req.x, req.h, z)
    if t.size == 0:
        raise EmptyWindow(f"no observations in [{req.x - z * req.h}, {req.x + req.h}]")
    system = omega_system(req.family, req.S, z)
    beta, cond = _solve_beta(t, system, req.h)
    return BetaEstimate(beta, req.h, z, int(t.size), cond)


# ---------------------------------------------------------------------------
# denominator


@lru_cache(maxsize=4096)
def _epanechnikov_series_moments(z: float, terms: int = 40) -> np.ndarray:
    nu = epanechnikov_nu(z)
    k = np.arange(terms)
    upper = (1.0 - (-z) ** (k + 1)) / (k + 1) - (1.0 - (-z) ** (k + 3)) / (k + 3)
    return nu * upper / np.array([factorial(int(i)) for i in k], dtype=float)


def log_chi1(a: float, z: float) -> float:
    """Log of the closed-form S=1 truncated-Epanechnikov denominator at ``a = beta_1 h``."""
    if abs(a) < SERIES_SWITCH:
        c = _epanechnikov_series_moments(float(z))
        return math.log(float(np.polynomial.polynomial.polyval(a, c)))
    nu = epanechnikov_nu(z)
    q = -2.0 - 2.0 * a * z + a * a * (1.0 - z * z)
    shift = max(a, -z * a)
    bracket = (2.0 * a - 2.0) * math.exp(a - shift) - q * math.exp(-z * a - shift)
    return shift + math.log(nu * bracket / a**3)


def chi1(a: float, z: float) -> float:
    """Closed-form S=1 truncated-Epanechnikov denominator."""
    return math.exp(log_chi1(a, z))


def _breakpoints(coef: np.ndarray, lo: float, hi: float) -> tuple[float, np.ndarray]:
    """Maximum of the polynomial on ``[lo, hi]`` and quadrature breakpoints.

    Breakpoints are the ends, the interior stationary points and, around each
    of these, points graded on the local peak width so that sharp peaks of
    ``exp(p)`` are resolved.
    """
    p = np.polynomial.Polynomial(coef)
    dp, d2p = p.deriv(), p.deriv(2)
    cands = [lo, hi]
    if coef.size > 2:
        for r in dp.roots():
            if abs(r.imag) < 1e-12 and lo < r.real < hi:
                cands.append(float(r.real))
    points = set(cands)
    for c in cands:
        width = 1.0 / max(abs(dp(c)), math.sqrt(abs(d2p(c))), 1.0)
        for k in range(4):
            for q in (c - width * 8.0**k, c + width * 8.0**k):
                if lo < q < hi:
                    points.add(q)
    return float(max(p(c) for c in cands)), np.array(sorted(points))


def _log_denominator_quad(scaled: np.ndarray, m: MKernel, z: float) -> float:
    S = scaled.size
    coef = np.concatenate([[0.0], scaled / _factorials(S)[1:]])
    shift, points = _breakpoints(coef, -z, 1.0)
    mp = m.poly(z)

    def integrand(t):
        return mp(t) * np.exp(np.polynomial.polynomial.polyval(t, coef) - shift)

    val = sum(adaptive_gauss_legendre(integrand, a, b, tol=1e-14) for a, b in zip(points[:-1], points[1:]))
    return shift + math.log(val)


def complete_bell(x: Sequence[float], order: int) -> np.ndarray:
    """Complete exponential Bell polynomials ``B_0..B_order`` at ``x_1, x_2, ...``.

    Missing arguments (index beyond ``len(x)``) are taken as zero.
    """
    xs = list(x) + [0.0] * max(0, order - len(x))
    B = np.zeros(order + 1)
    B[0] = 1.0
    for k in range(order):
        B[k + 1] = sum(comb(k, i) * B[k - i] * xs[i] for i in range(k + 1))
    return B


def bell_denominator(scaled: np.ndarray, m: MKernel, z: float, order: int | None = None) -> float:
    """Truncated expansion ``sum_k B_k(delta) c_mkz`` of the denominator.

    ``delta_s = beta_s h^s``; the default truncation order is ``S + 1``.
    Diagnostic only: it is not guaranteed to be positive.
    """
    order = scaled.size + 1 if order is None else order
    B = complete_bell(scaled, order)
    c = [1.0] + [c_moment(m, k, z) for k in range(1, order + 1)]
    return float(np.dot(B, c))


def _resolve_method(req: EvalRequest) -> str:
    if req.denom == "auto":
        return "exact" if (req.S == 1 and req.m == EPANECHNIKOV) else "quad"
    return req.denom


def log_denominator(beta: BetaEstimate, req: EvalRequest) -> float:
    method = _resolve_method(req)
    m = req.m
    if method == "exact":
        if req.S != 1 or m != EPANECHNIKOV:
            raise MethodUnsupported("the exact denominator is only available for S=1 with the "
                                    "truncated Epanechnikov kernel")
        return log_chi1(float(beta.scaled[0]), beta.z)
    if method == "quad":
        return _log_denominator_quad(beta.scaled, m, beta.z)
    d = bell_denominator(beta.scaled, m, beta.z)
    if not d > 0:
        raise MethodUnsupported(f"Bell expansion of the denominator is nonpositive ({d:.3g})")
    return math.log(d)


def denominator(beta: BetaEstimate, req: EvalRequest) -> float:
    """``int m_z(t) exp(sum_s beta_s t^s h^s / s!) dt`` by the requested method."""
    if _resolve_method(req) == "bell":
        return bell_denominator(beta.scaled, req.m, beta.z)
    return math.exp(log_denominator(beta, req))


# ---------------------------------------------------------------------------
# density and friends


def _empty(x, h, z, n_window=0):
    return DensityEstimate(x, h, z, 0.0, None, 0.0, None, n_window, "empty_window")


def estimate_density(sample: Sample, req: EvalRequest) -> DensityEstimate:
    """Density, log-density and density-derivative estimate at ``req.x``.

    An empty window gives ``f_hat = 0`` with status ``"empty_window"``.
    :class:`SingularSystem` and :class:`MethodUnsupported` propagate.
    """
    z = req.z(sample.lower)
    t = _window_t(sample, req.x, req.h, z)
    if t.size == 0:
        return _empty(req.x, req.h, z)
    system = omega_system(req.family, req.S, z)
    beta_vec, cond = _solve_beta(t, system, req.h)
    beta = BetaEstimate(beta_vec, req.h, z, int(t.size), cond)
    numerator = float(np.sum(req.m.poly(z)(t))) / (sample.n * req.h)
    if numerator <= 0:
        # only reachable when every point sits where m_z vanishes
        raise SingularSystem("numerator kernel vanishes at every observation in the window")
    L_hat = math.log(numerator) - log_denominator(beta, req)
    f_hat = math.exp(L_hat)
    return DensityEstimate(req.x, req.h, z, f_hat, L_hat, float(beta_vec[0]) * f_hat,
                           beta, int(t.size))


def estimate_logdensity(sample: Sample, req: EvalRequest) -> float:
    est = estimate_density(sample, req)
    if est.L_hat is None:
        raise ZeroDensity(f"density estimate is zero at x={req.x} (empty window)")
    return est.L_hat


def estimate_hazard(sample: Sample, req: EvalRequest) -> float:
    """``f_hat(x) / Fbar_n(x)`` with the empirical survivor function."""
    surv = sample.survivor(req.x)
    if surv <= 0:
        raise ZeroSurvivor(f"no observations exceed x={req.x}")
    return estimate_density(sample, req).f_hat / surv


def _bandwidth_fn(bandwidth) -> Callable[[float], float]:
    from .asymptotics import bandwidth_interpolate

    if callable(bandwidth):
        return bandwidth
    if isinstance(bandwidth, (tuple, list)):
        h0, h1 = bandwidth
        return lambda x: bandwidth_interpolate(x, h0, h1)
    h = float(bandwidth)
    return lambda x: h


def estimate_curve(sample: Sample, grid, bandwidth, S: int = 1, family: GFamily | str = PS1,
                   m: MKernel | str = EPANECHNIKOV, denom: str = "auto") -> list[DensityEstimate]:
    """Estimates on a sorted grid; per-point failures are recorded in ``status``.

    ``bandwidth`` is a fixed ``h``, a pair ``(h0, h1)`` interpolated linearly
    between boundary and interior, or a callable ``x -> h``.
    """
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ConfigurationError("evaluation grid is empty")
    if np.any(np.diff(grid) < 0):
        raise ConfigurationError("evaluation grid must be sorted")
    hfun = _bandwidth_fn(bandwidth)
    family, m = get_family(family), get_kernel(m)
    out = []
    for x in grid:
        h = float(hfun(float(x)))
        req = EvalRequest(float(x), h, S, family, m, denom)
        try:
            out.append(estimate_density(sample, req))
        except LogDensError as exc:
            z = req.z(sample.lower)
            out.append(DensityEstimate(float(x), h, z, math.nan, None, math.nan, None, 0, exc.code))
    return out
