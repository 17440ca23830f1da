"""Reference density estimators used in the simulation comparison.

All of them use the Epanechnikov kernel ``k(u) = 3(1 - u^2)/4`` (or a
truncated version) and operate on a :class:`~logdens.estimator.Sample`
supported on ``[sample.lower, inf)``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, EmptyWindow, LogDensError, NoConvergence, RankDeficient
from .estimator import EvalRequest, Sample, estimate_density
from .kernels import EPANECHNIKOV, PS2, EquivalentKernel, T, boundary_ratio, equivalent_kernel_poly
from .quadrature import gauss_legendre_nodes


def epanechnikov(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def epanechnikov_deriv(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 1.0, -1.5 * u, 0.0)


def rp_density(sample: Sample, x: float, h: float) -> float:
    """Rosenblatt-Parzen estimate ``sum k((x_i - x)/h) / (n h)``."""
    u = (sample.window(x - h, x + h) - x) / h
    return float(np.sum(epanechnikov(u))) / (sample.n * h)


def rp_density_deriv(sample: Sample, x: float, h: float) -> float:
    """Derivative in ``x`` of :func:`rp_density`."""
    u = (sample.window(x - h, x + h) - x) / h
    return -float(np.sum(epanechnikov_deriv(u))) / (sample.n * h * h)


def boundary_rp_density(sample: Sample, x: float, h: float) -> float:
    """Boundary-kernel estimate with the equivalent kernel of (PS2, Epanechnikov).

    At ``z = 0`` the kernel is ``6(1 - 2t)(1 - t)``; at ``z = 1`` it is the
    Epanechnikov kernel.  The estimate may be negative.
    """
    z = boundary_ratio(x, h, sample.lower)
    omega = equivalent_kernel_poly(EPANECHNIKOV, PS2, 1, z)
    t = (sample.window(x - z * h, x + h) - x) / h
    return float(np.sum(omega(t))) / (sample.n * h)


def _epanechnikov_moments(z: float, upto: int) -> list[float]:
    k = 0.75 * (1.0 - T**2)
    return [float((k * T**j).integ()(1.0) - (k * T**j).integ()(-z)) for j in range(upto + 1)]


def local_linear_kernel(z: float) -> EquivalentKernel:
    """Density equivalent kernel of the local log-linear likelihood fit.

    ``k(t)(mu2 - mu1 t) / (mu0 mu2 - mu1^2)`` with truncated Epanechnikov
    moments on ``[-z, 1]``; the Epanechnikov kernel itself at ``z = 1``.
    """
    mu0, mu1, mu2 = _epanechnikov_moments(z, 2)
    poly = 0.75 * (1.0 - T**2) * (mu2 - mu1 * T) / (mu0 * mu2 - mu1 * mu1)
    return EquivalentKernel(poly, float(z), 1)


def cjm_kernel(z: float) -> EquivalentKernel:
    """Density equivalent kernel of the local quadratic CDF fit.

    The slope weight ``w(t) = e_2' M^-1 (1, t, t^2/2) k(t)`` acts on ``F``;
    integrating by parts gives the kernel ``int_t^1 w(s) ds`` acting on ``f``.
    The bias constant multiplies ``f''`` rather than ``f L''``.
    """
    basis = [T**0, T, T**2 / 2.0]
    k = 0.75 * (1.0 - T**2)

    def integral(p):
        q = p.integ()
        return float(q(1.0) - q(-z))

    M = np.array([[integral(k * a * b) for b in basis] for a in basis])
    row = np.linalg.solve(M, np.eye(3))[1]
    w = k * sum((c * p for c, p in zip(row, basis)), 0.0 * T)
    W = w.integ()
    return EquivalentKernel(W(1.0) - W, float(z), 1)


# ---------------------------------------------------------------------------
# local polynomial fit of the empirical CDF


class CJMEstimate(NamedTuple):
    F: float
    f: float
    f_prime: float


def ls_cjm_density(sample: Sample, x: float, h: float) -> CJMEstimate:
    """Weighted local quadratic fit of the empirical CDF.

    Regresses ``F_n(x_i)`` on ``(1, x_i - x, (x_i - x)^2 / 2)`` with weights
    ``k((x_i - x)/h)`` over the sample points; the coefficients estimate
    ``(F(x), f(x), f'(x))``.  No sign constraint is imposed.
    """
    lo = np.searchsorted(sample.values, x - h, side="left")
    hi = np.searchsorted(sample.values, x + h, side="right")
    pts = sample.values[lo:hi]
    t = (pts - x) / h
    w = epanechnikov(t)
    keep = w > 0
    t, w = t[keep], w[keep]
    if np.unique(t).size < 3:
        raise RankDeficient(f"fewer than 3 distinct observations with positive weight near x={x}")
    # right-continuous ECDF at each point (ties share the largest rank)
    F = np.searchsorted(sample.values, pts[keep], side="right") / sample.n
    X = np.column_stack([np.ones_like(t), t, 0.5 * t * t])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], F * sw, rcond=None)
    return CJMEstimate(float(coef[0]), float(coef[1]) / h, float(coef[2]) / h**2)


# ---------------------------------------------------------------------------
# generalized reflection


class KZEstimate(NamedTuple):
    f: float
    f_prime: float
    d_hat: float
    pilot_failed: bool


KZ_CUBIC = 0.55


def kz_pilot_slope(sample: Sample, h_Lprime: float) -> float | None:
    """Finite-difference estimate of ``L'`` at the boundary.

    ``(log f(2 h_L) - log f_b(0)) / (2 h_L)`` with an Epanechnikov estimate at
    ``2 h_L`` and the ``6(1 - 2t)(1 - t)`` boundary-kernel estimate at the
    boundary.  Returns ``None`` if either pilot is nonpositive.
    """
    x0 = sample.lower
    f_far = rp_density(sample, x0 + 2.0 * h_Lprime, h_Lprime)
    f_near = boundary_rp_density(sample, x0, h_Lprime)
    if f_far <= 0 or f_near <= 0:
        return None
    return (math.log(f_far) - math.log(f_near)) / (2.0 * h_Lprime)


def kz_transform(y, d: float, cubic: float = KZ_CUBIC):
    """``y + d y^2 + A d^2 y^3``; increasing on ``y >= 0`` whenever ``A > 1/3``."""
    y = np.asarray(y, dtype=float)
    return y + d * y * y + cubic * d * d * y**3


def kz_density(sample: Sample, x: float, h: float, h_Lprime: float,
               cubic: float = KZ_CUBIC, d_hat: float | None = None) -> KZEstimate:
    """Generalized reflection estimate and its derivative at ``x``.

    For ``x < h`` the estimate is
    ``sum [k((x - y_i)/h) + k((x + g(y_i))/h)] / (n h)``, with ``y_i`` the data
    measured from the support bound and ``g`` from :func:`kz_transform` with
    slope ``d`` estimated by :func:`kz_pilot_slope` (or ``d_hat`` if given).
    For ``x >= h`` it is the plain RP estimate.  A failed pilot sets ``d = 0``
    (simple reflection) and is flagged.
    """
    if not cubic > 1.0 / 3.0:
        raise ConfigurationError("the cubic coefficient must exceed 1/3 for a monotone transform")
    failed = False
    if d_hat is None:
        d_hat = kz_pilot_slope(sample, h_Lprime)
        if d_hat is None:
            d_hat, failed = 0.0, True
    y0 = x - sample.lower
    if y0 >= h:
        return KZEstimate(rp_density(sample, x, h), rp_density_deriv(sample, x, h), d_hat, failed)
    y = sample.window(sample.lower, sample.lower + y0 + h) - sample.lower
    direct = (y0 - y) / h
    # g(y) >= (1 - 1/(4A)) y for d < 0, so this bound covers every y with g(y) < h - y0
    shrink = 1.0 if d_hat >= 0 else 1.0 - 1.0 / (4.0 * cubic)
    yr = sample.window(sample.lower, sample.lower + (h - y0) / shrink) - sample.lower
    reflected = (y0 + kz_transform(yr, d_hat, cubic)) / h
    nh = sample.n * h
    f = float(np.sum(epanechnikov(direct)) + np.sum(epanechnikov(reflected))) / nh
    fp = float(np.sum(epanechnikov_deriv(direct)) + np.sum(epanechnikov_deriv(reflected))) / (nh * h)
    return KZEstimate(f, fp, d_hat, failed)


# ---------------------------------------------------------------------------
# local likelihood


class LoaderEstimate(NamedTuple):
    f: float
    L_prime: float


LOADER_TOL = 1e-10
LOADER_MAX_ITER = 100
_LOADER_NODES = 64


def _tilted_moments(a0: float, b: float, z: float):
    """``e^a0 int_{-z}^1 k(t) t^j e^(b t) dt`` for j = 0, 1, 2."""
    nodes, weights = gauss_legendre_nodes(_LOADER_NODES)
    half = 0.5 * (1.0 + z)
    t = (1.0 - z) * 0.5 + half * nodes
    base = half * weights * 0.75 * (1.0 - t * t) * np.exp(a0 + b * t)
    return float(base.sum()), float(base @ t), float(base @ (t * t))


def loader_density(sample: Sample, x: float, h: float, tol: float = LOADER_TOL,
                   max_iter: int = LOADER_MAX_ITER) -> LoaderEstimate:
    """Local log-linear likelihood estimate of ``(f(x), L'(x))``.

    Maximises ``sum k(t_i)(a0 + b t_i) - n h int_{-z}^1 k(t) exp(a0 + b t) dt``
    over ``(a0, b)`` (``b = a1 h``) by damped Newton steps.  The kernel is the
    Epanechnikov kernel truncated to ``[-z, 1]``.
    """
    z = boundary_ratio(x, h, sample.lower)
    t = (sample.window(x - z * h, x + h) - x) / h
    if t.size == 0:
        raise EmptyWindow(f"no observations in the window at x={x}")
    k = epanechnikov(t)
    nh = sample.n * h
    K0 = float(k.sum()) / nh
    K1 = float(k @ t) / nh
    if K0 <= 0:
        raise NoConvergence("all window observations have zero kernel weight")

    try:
        warm = estimate_density(sample, EvalRequest(x, h, 1, PS2, EPANECHNIKOV))
        a0, b = math.log(warm.f_hat), float(warm.beta.beta[0]) * h
        if not (math.isfinite(a0) and math.isfinite(b)):
            raise ValueError
    except (LogDensError, ValueError, TypeError, AttributeError):
        a0, b = math.log(K0 / _tilted_moments(0.0, 0.0, z)[0]), 0.0

    def objective(a0_, b_):
        return a0_ * K0 + b_ * K1 - _tilted_moments(a0_, b_, z)[0]

    # the objective is normalised by nh, so an absolute tolerance is scale-free in n and h
    scale = 1.0
    current = objective(a0, b)
    for _ in range(max_iter):
        I0, I1, I2 = _tilted_moments(a0, b, z)
        grad = np.array([K0 - I0, K1 - I1])
        if np.max(np.abs(grad)) <= tol * scale:
            return LoaderEstimate(math.exp(a0), float(b) / h)
        H = np.array([[I0, I1], [I1, I2]])
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        # near the optimum the ascent is below rounding; a falling gradient then decides
        slack = 64.0 * np.finfo(float).eps * max(1.0, abs(current))
        gnorm = float(np.max(np.abs(grad)))
        while lam > 1e-12:
            a0_new, b_new = a0 + lam * step[0], b + lam * step[1]
            val = objective(a0_new, b_new)
            if math.isfinite(val) and val >= current:
                break
            if math.isfinite(val) and val >= current - slack:
                J0, J1, _ = _tilted_moments(a0_new, b_new, z)
                if max(abs(K0 - J0), abs(K1 - J1)) < gnorm:
                    break
            lam *= 0.5
        else:
            # no ascent left at rounding level: stop and judge by the gradient
            break
        a0, b, current = a0_new, b_new, val
    grad_norm = float(np.max(np.abs([K0 - _tilted_moments(a0, b, z)[0],
                                      K1 - _tilted_moments(a0, b, z)[1]])))
    if grad_norm <= tol * scale:
        return LoaderEstimate(math.exp(a0), float(b) / h)
    raise NoConvergence(f"local likelihood Newton iteration did not converge at x={x}",
                        last_iterate=(math.exp(a0), b / h))
