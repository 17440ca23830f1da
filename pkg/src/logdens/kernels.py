"""Weight-function families, numerator kernels and the constants built from them.

Every preset ``g`` and ``m`` is a polynomial on ``[-z, 1]``, so the moment
matrix, the Gram matrix of ``g'``, the kernel moments and the equivalent
kernel are all computed by exact polynomial integration.  A quadrature
path (``method="quadrature"``) recomputes the same objects numerically and
is used as a cross-check.

Sign convention: a family's ``g_j`` vanishes at ``-z`` and ``1`` and the
moment matrix is ``Omega[j, s] = -int g_j(t) t^(s-1) / (s-1)! dt``.  With
``g_j(t) = (t + z)^j (t - 1)`` this gives the positive closed form of
``omega_entry``.  Flipping the sign of any ``g_j`` leaves ``b``,
``(Omega' V^-1 Omega)^-1`` and the equivalent kernel unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from math import factorial
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConfigurationError
from .quadrature import adaptive_gauss_legendre

__all__ = [
    "GFamily",
    "MKernel",
    "OmegaSystem",
    "EquivalentKernel",
    "PS1",
    "PS2",
    "PS3",
    "EPANECHNIKOV",
    "UNIFORM",
    "FAMILIES",
    "KERNELS",
    "boundary_ratio",
    "custom_family",
    "custom_kernel",
    "get_family",
    "get_kernel",
    "g_eval",
    "g_prime_eval",
    "omega_entry",
    "v_entry",
    "omega_system",
    "bias_vector",
    "c_moment",
    "c_moments",
    "equivalent_kernel",
    "equivalent_kernel_poly",
]

T = Polynomial([0.0, 1.0])


def boundary_ratio(x: float, h: float, lower: float = 0.0) -> float:
    """``z = min((x - lower) / h, 1)``; raises for ``x < lower`` or ``h <= 0``."""
    if not h > 0:
        raise ConfigurationError(f"bandwidth must be positive, got {h!r}")
    if x < lower:
        raise ConfigurationError(f"evaluation point {x!r} lies below the support bound {lower!r}")
    return min((x - lower) / h, 1.0)


def _integrate(p: Polynomial, lo: float, hi: float) -> float:
    P = p.integ()
    return float(P(hi) - P(lo))


def _quad(p: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
    return adaptive_gauss_legendre(p, lo, hi, tol=1e-13)


# ---------------------------------------------------------------------------
# g families


def _ps1_core(j: int, z: float) -> Polynomial:
    return (T + z) ** (j - 1)


def _ps2_core(j: int, z: float) -> Polynomial:
    return (T + z) ** (j - 1) * (T - 1.0)


def _ps3_core(j: int, z: float) -> Polynomial:
    return (T + z) ** (j - 1) * (T - 5.0 / 7.0)


@dataclass(frozen=True)
class GFamily:
    """A vector of weight functions ``g_j(t) = sign_j (t + z)(t - 1) q_j(t; z)``.

    The factor ``(t + z)(t - 1)`` is built in, so ``g_j(-z) = g_j(1) = 0``
    for any core polynomial ``q_j``.
    """

    name: str
    core: Callable[[int, float], Polynomial] = field(repr=False)
    signs: tuple[float, ...] = ()

    def sign(self, j: int) -> float:
        if j - 1 < len(self.signs):
            return float(self.signs[j - 1])
        return 1.0

    def component(self, j: int, z: float) -> Polynomial:
        if j < 1:
            raise ConfigurationError(f"component index must be >= 1, got {j}")
        q = self.core(j, z)
        if not isinstance(q, Polynomial):
            q = Polynomial(np.asarray(q, dtype=float))
        return self.sign(j) * (T + z) * (T - 1.0) * q

    def components(self, S: int, z: float) -> list[Polynomial]:
        return [self.component(j, z) for j in range(1, S + 1)]

    def negated(self, indices: Sequence[int]) -> "GFamily":
        """Same family with the listed (1-based) components multiplied by -1."""
        n = max([len(self.signs), *indices]) if indices else len(self.signs)
        signs = [self.sign(j) for j in range(1, n + 1)]
        for j in indices:
            signs[j - 1] = -signs[j - 1]
        return replace(self, name=f"{self.name}~neg{tuple(indices)}", signs=tuple(signs))


PS1 = GFamily("ps1", _ps1_core)
PS2 = GFamily("ps2", _ps2_core)
PS3 = GFamily("ps3", _ps3_core)

FAMILIES = {"ps1": PS1, "ps2": PS2, "ps3": PS3}


def custom_family(name: str, core: Callable[[int, float], Polynomial | Sequence[float]]) -> GFamily:
    """Family whose ``j``-th component is ``(t + z)(t - 1) * core(j, z)``.

    ``core`` returns a :class:`~numpy.polynomial.Polynomial` or an array of
    ascending coefficients in ``t``.
    """
    return GFamily(name, core)


def get_family(name: str | GFamily) -> GFamily:
    if isinstance(name, GFamily):
        return name
    try:
        return FAMILIES[name.lower()]
    except KeyError:
        raise ConfigurationError(f"unknown g family {name!r}; choose from {sorted(FAMILIES)}") from None


def _indicator(t: np.ndarray, z: float) -> np.ndarray:
    return (t >= -z) & (t <= 1.0)


def g_eval(family: GFamily, j: int, z: float, t):
    """``g_j(t)`` including the indicator of ``[-z, 1]``."""
    t = np.asarray(t, dtype=float)
    val = np.where(_indicator(t, z), family.component(j, z)(t), 0.0)
    return float(val) if val.ndim == 0 else val


def g_prime_eval(family: GFamily, j: int, z: float, t):
    """Analytic derivative of ``g_j`` (zero outside ``[-z, 1]``)."""
    t = np.asarray(t, dtype=float)
    val = np.where(_indicator(t, z), family.component(j, z).deriv()(t), 0.0)
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# m kernels


def _epanechnikov_shape(z: float) -> Polynomial:
    return 1.0 - T**2


def _uniform_shape(z: float) -> Polynomial:
    return Polynomial([1.0])


@dataclass(frozen=True)
class MKernel:
    """Nonnegative kernel on ``[-z, 1]``, renormalised for each ``z``."""

    name: str
    shape: Callable[[float], Polynomial] = field(repr=False)

    def poly(self, z: float) -> Polynomial:
        return _normalised_kernel(self, float(z))

    def __call__(self, t, z: float):
        t = np.asarray(t, dtype=float)
        val = np.where(_indicator(t, z), self.poly(z)(t), 0.0)
        return float(val) if val.ndim == 0 else val


@lru_cache(maxsize=4096)
def _normalised_kernel(kernel: MKernel, z: float) -> Polynomial:
    p = kernel.shape(z)
    if not isinstance(p, Polynomial):
        p = Polynomial(np.asarray(p, dtype=float))
    mass = _integrate(p, -z, 1.0)
    if not mass > 0:
        raise ConfigurationError(f"kernel {kernel.name!r} has nonpositive mass on [-{z}, 1]")
    grid = np.linspace(-z, 1.0, 401)
    if np.min(p(grid)) < -1e-12 * np.max(np.abs(p(grid))):
        raise ConfigurationError(f"kernel {kernel.name!r} is negative on [-{z}, 1]")
    return p / mass


EPANECHNIKOV = MKernel("epan", _epanechnikov_shape)
UNIFORM = MKernel("uniform", _uniform_shape)

KERNELS = {"epan": EPANECHNIKOV, "uniform": UNIFORM}


def custom_kernel(name: str, shape: Callable[[float], Polynomial | Sequence[float]]) -> MKernel:
    """Kernel proportional to ``shape(z)`` on ``[-z, 1]``; normalisation is automatic."""
    return MKernel(name, shape)


def get_kernel(name: str | MKernel) -> MKernel:
    if isinstance(name, MKernel):
        return name
    try:
        return KERNELS[name.lower()]
    except KeyError:
        raise ConfigurationError(f"unknown m kernel {name!r}; choose from {sorted(KERNELS)}") from None


def epanechnikov_nu(z: float) -> float:
    """Normalising constant of the truncated Epanechnikov kernel."""
    return 3.0 / ((1.0 + z) ** 2 * (2.0 - z))


# ---------------------------------------------------------------------------
# closed forms for the (t + z)^j (t - 1) family


def omega_entry(j: int, s: int, z: float) -> float:
    """Closed-form ``Omega[j, s]`` for ``g_j(t) = (t + z)^j (t - 1)``."""
    if j < 1 or s < 1:
        raise ConfigurationError("indices must be >= 1")
    total = 0.0
    for k in range(s):
        total += ((-1) ** (s - k + 1) * (s - k) * factorial(j)
                  / (factorial(j + s + 1 - k) * factorial(k))
                  * (1.0 + z) ** (j + s + 1 - k))
    return total


def v_entry(j: int, s: int, z: float) -> float:
    """Closed-form ``int g_j' g_s'`` for ``g_j(t) = (t + z)^j (t - 1)``."""
    if j < 1 or s < 1:
        raise ConfigurationError("indices must be >= 1")
    return 2.0 * j * s * (1.0 + z) ** (j + s + 1) / ((j + s + 1) * (j + s) * (j + s - 1))


# ---------------------------------------------------------------------------
# assembled system


@dataclass(frozen=True)
class OmegaSystem:
    """Constants of the ``S``-dimensional moment system at boundary ratio ``z``."""

    S: int
    z: float
    family: GFamily
    omega: np.ndarray = field(repr=False)
    omega_next: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    b: np.ndarray
    g: tuple[Polynomial, ...] = field(repr=False)
    g_prime: tuple[Polynomial, ...] = field(repr=False)

    @property
    def beta_cov(self) -> np.ndarray:
        """``(Omega' V^-1 Omega)^-1``: scaled covariance of the derivative estimates."""
        M = self.omega.T @ np.linalg.solve(self.V, self.omega)
        C = np.linalg.inv(M)
        return 0.5 * (C + C.T)

    def omega_inv_g_prime(self) -> list[Polynomial]:
        """The polynomials ``(Omega^-1 g')_k``, k = 1..S."""
        W = np.linalg.inv(self.omega)
        return [sum((W[k, j] * self.g_prime[j] for j in range(self.S)), Polynomial([0.0]))
                for k in range(self.S)]


def _system_integrals(gs, gps, S, z, method):
    omega = np.empty((S, S + 1))
    V = np.empty((S, S))
    for j in range(S):
        for s in range(1, S + 2):
            integrand = -gs[j] * T ** (s - 1) / factorial(s - 1)
            if method == "exact":
                omega[j, s - 1] = _integrate(integrand, -z, 1.0)
            else:
                omega[j, s - 1] = _quad(integrand, -z, 1.0)
        for s in range(S):
            prod = gps[j] * gps[s]
            V[j, s] = _integrate(prod, -z, 1.0) if method == "exact" else _quad(prod, -z, 1.0)
    return omega, V


@lru_cache(maxsize=8192)
def omega_system(family: GFamily, S: int, z: float, method: str = "exact") -> OmegaSystem:
    """Assemble ``Omega``, ``Omega[:, S+1]``, ``V`` and ``b = Omega^-1 Omega[:, S+1]``.

    ``method`` is ``"exact"`` (polynomial integration) or ``"quadrature"``.
    Raises :class:`ConfigurationError` if ``Omega`` is singular.
    """
    if S < 1:
        raise ConfigurationError(f"polynomial order S must be >= 1, got {S}")
    if not 0.0 <= z <= 1.0:
        raise ConfigurationError(f"boundary ratio must lie in [0, 1], got {z}")
    if method not in ("exact", "quadrature"):
        raise ConfigurationError(f"unknown integration method {method!r}")
    z = float(z)
    gs = tuple(family.components(S, z))
    gps = tuple(g.deriv() for g in gs)
    full, V = _system_integrals(gs, gps, S, z, method)
    omega = full[:, :S]
    omega_next = full[:, S]
    cond = np.linalg.cond(omega)
    if not np.isfinite(cond) or cond > 1e13:
        raise ConfigurationError(
            f"moment matrix of family {family.name!r} is singular at S={S}, z={z} (cond={cond:.3g})")
    b = np.linalg.solve(omega, omega_next)
    for a in (omega, omega_next, V, b):
        a.setflags(write=False)
    return OmegaSystem(S, z, family, omega, omega_next, V, b, gs, gps)


def bias_vector(S: int, z: float, family: GFamily = PS1) -> np.ndarray:
    """Bias direction ``b = Omega^-1 Omega[:, S+1]``."""
    return omega_system(get_family(family), S, float(z)).b.copy()


# ---------------------------------------------------------------------------
# kernel moments and the equivalent kernel


def c_moment(m: MKernel, s: int, z: float, method: str = "exact") -> float:
    """``c_msz = int m_z(t) t^s dt / s!``."""
    m = get_kernel(m)
    integrand = m.poly(z) * T**s / factorial(s)
    if method == "exact":
        return _integrate(integrand, -z, 1.0)
    return _quad(integrand, -z, 1.0)


def c_moments(m: MKernel, S: int, z: float) -> np.ndarray:
    """The vector ``(c_m1z, ..., c_mSz)``."""
    return np.array([c_moment(m, s, z) for s in range(1, S + 1)])


@dataclass(frozen=True)
class EquivalentKernel:
    """``omega_z(t) = m_z(t) - c_mz' Omega^-1 g'(t)`` on ``[-z, 1]``."""

    poly: Polynomial
    z: float
    S: int

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        val = np.where(_indicator(t, self.z), self.poly(t), 0.0)
        return float(val) if val.ndim == 0 else val

    def moment(self, s: int) -> float:
        """``int omega_z(t) t^s dt``."""
        return _integrate(self.poly * T**s, -self.z, 1.0)

    def bias_constant(self) -> float:
        """``int omega_z(t) t^(S+1) dt / (S+1)!``."""
        return self.moment(self.S + 1) / factorial(self.S + 1)

    def roughness(self) -> float:
        """``int omega_z(t)^2 dt``."""
        return _integrate(self.poly**2, -self.z, 1.0)

    def coefficients(self) -> np.ndarray:
        """Ascending coefficients in ``t``, trailing zeros trimmed at 1e-12."""
        c = np.array(self.poly.coef, dtype=float)
        c[np.abs(c) < 1e-12] = 0.0
        return np.trim_zeros(c, "b") if np.any(c) else np.zeros(1)


@lru_cache(maxsize=4096)
def equivalent_kernel_poly(m: MKernel, family: GFamily, S: int, z: float) -> EquivalentKernel:
    m = get_kernel(m)
    system = omega_system(get_family(family), S, float(z))
    c = c_moments(m, S, z)
    correction = sum((c[k] * p for k, p in enumerate(system.omega_inv_g_prime())),
                     Polynomial([0.0]))
    return EquivalentKernel(m.poly(z) - correction, float(z), S)


def equivalent_kernel(m: MKernel, family: GFamily, S: int, z: float, t):
    """Value of the equivalent kernel at ``t`` (zero outside ``[-z, 1]``)."""
    return equivalent_kernel_poly(get_kernel(m), get_family(family), S, float(z))(t)
