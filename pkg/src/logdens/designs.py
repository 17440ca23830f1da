"""Simulation designs on ``[0, inf)``: exact densities, log-derivatives and samplers.

F1  rescaled beta on [0, 5]        theta (1 - x/5)^(theta-1) / 5
F2  N(theta/2, 1) truncated at 0
F3  (e^-x + theta x e^-x) / (1 + theta)
F4  (e^-x + theta x^2 e^-x) / (1 + 2 theta)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigurationError, OutOfSupport

DESIGN_IDS = ("F1", "F2", "F3", "F4")


@dataclass(frozen=True)
class Design:
    id: str
    theta: float = 4.0

    def __post_init__(self):
        ident = self.id.upper()
        if ident not in DESIGN_IDS:
            raise ConfigurationError(f"unknown design {self.id!r}; choose from {DESIGN_IDS}")
        object.__setattr__(self, "id", ident)
        if not self.theta > 0:
            raise ConfigurationError("theta must be positive")
        if ident == "F1" and self.theta < 1:
            raise ConfigurationError("F1 needs theta >= 1 for a bounded density at 0")

    @property
    def upper(self) -> float:
        return 5.0 if self.id == "F1" else np.inf

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0) or np.any(x > self.upper):
            raise OutOfSupport(f"{self.id} is supported on [0, {self.upper}]")
        return x

    # -- truth ------------------------------------------------------------

    def density(self, x):
        x = self._check(x)
        th = self.theta
        if self.id == "F1":
            out = th * (1.0 - x / 5.0) ** (th - 1.0) / 5.0
        elif self.id == "F2":
            mu = th / 2.0
            out = np.exp(-0.5 * (x - mu) ** 2) / np.sqrt(2.0 * np.pi) / special.ndtr(mu)
        elif self.id == "F3":
            out = np.exp(-x) * (1.0 + th * x) / (1.0 + th)
        else:
            out = np.exp(-x) * (1.0 + th * x * x) / (1.0 + 2.0 * th)
        return _scalar(out)

    def logderiv(self, x):
        """``L'(x)``."""
        x = self._check(x)
        th = self.theta
        if self.id == "F1":
            out = -(th - 1.0) / (5.0 - x)
        elif self.id == "F2":
            out = -(x - th / 2.0)
        elif self.id == "F3":
            out = -1.0 + th / (1.0 + th * x)
        else:
            out = -1.0 + 2.0 * th * x / (1.0 + th * x * x)
        return _scalar(out)

    def log_second_deriv(self, x):
        """``L''(x)``."""
        x = self._check(x)
        th = self.theta
        if self.id == "F1":
            out = -(th - 1.0) / (5.0 - x) ** 2
        elif self.id == "F2":
            out = -np.ones_like(x)
        elif self.id == "F3":
            out = -th * th / (1.0 + th * x) ** 2
        else:
            out = 2.0 * th * (1.0 - th * x * x) / (1.0 + th * x * x) ** 2
        return _scalar(out)

    def density_deriv(self, x):
        """``f'(x) = L'(x) f(x)``."""
        return _scalar(np.asarray(self.logderiv(x)) * np.asarray(self.density(x)))

    def density_second_deriv(self, x):
        """``f''(x) = (L''(x) + L'(x)^2) f(x)``."""
        lp = np.asarray(self.logderiv(x))
        return _scalar((np.asarray(self.log_second_deriv(x)) + lp * lp) * np.asarray(self.density(x)))

    def cdf(self, x):
        x = self._check(x)
        th = self.theta
        if self.id == "F1":
            out = 1.0 - (1.0 - x / 5.0) ** th
        elif self.id == "F2":
            mu = th / 2.0
            lo = special.ndtr(-mu)
            out = (special.ndtr(x - mu) - lo) / (1.0 - lo)
        elif self.id == "F3":
            # Exp(1) and Gamma(2) components
            out = (special.gammainc(1, x) + th * special.gammainc(2, x)) / (1.0 + th)
        else:
            out = (special.gammainc(1, x) + 2.0 * th * special.gammainc(3, x)) / (1.0 + 2.0 * th)
        return _scalar(out)

    # -- sampling -----------------------------------------------------------

    def mixture(self) -> tuple[float, float] | None:
        """(weight, shape) of the gamma component for the mixture designs."""
        if self.id == "F3":
            return self.theta / (1.0 + self.theta), 2.0
        if self.id == "F4":
            return 2.0 * self.theta / (1.0 + 2.0 * self.theta), 3.0
        return None

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` i.i.d. draws (unsorted)."""
        th = self.theta
        if self.id == "F1":
            u = rng.random(n)
            return 5.0 * (1.0 - u ** (1.0 / th))
        if self.id == "F2":
            mu = th / 2.0
            lo = special.ndtr(-mu)
            u = rng.random(n)
            return np.maximum(mu + special.ndtri(lo + u * (1.0 - lo)), 0.0)
        weight, shape = self.mixture()
        pick = rng.random(n) < weight
        gam = rng.gamma(shape, 1.0, n)
        expo = rng.standard_exponential(n)
        return np.where(pick, gam, expo)


def _scalar(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def true_density(design: Design, x):
    return design.density(x)


def true_logderiv(design: Design, x):
    return design.logderiv(x)


def true_density_deriv(design: Design, x):
    return design.density_deriv(x)


def sample_design(design: Design, n: int, rng: np.random.Generator):
    from .estimator import Sample

    return Sample(design.sample(n, rng))
