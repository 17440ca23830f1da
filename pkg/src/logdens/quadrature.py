"""Adaptive Gauss-Legendre quadrature on a finite interval."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def fixed_gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                         order: int = 32) -> float:
    """Non-adaptive rule; ``f`` must accept a vector of nodes."""
    x, w = gauss_legendre_nodes(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return float(half * np.dot(w, f(mid + half * x)))


# panels agreeing to this relative accuracy are at the rounding floor
_ROUNDING = 64 * np.finfo(float).eps


def adaptive_gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                            tol: float = 1e-12, order: int = 20,
                            max_depth: int = 40, max_panels: int = 20_000) -> float:
    """Integrate ``f`` over [a, b] by recursive bisection.

    Each panel is integrated with an ``order``-point and a ``2*order``-point
    rule; the panel is accepted when the two agree to within
    ``tol * max(1, |estimate|)`` scaled by the panel's share of [a, b], or
    to within rounding of the panel value.  After ``max_panels`` panels the
    remaining ones are accepted as they are.  ``f`` is called with numpy
    arrays of nodes.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    total_width = b - a

    def panel(lo, hi):
        coarse = fixed_gauss_legendre(f, lo, hi, order)
        fine = fixed_gauss_legendre(f, lo, hi, 2 * order)
        return coarse, fine

    result = 0.0
    stack = [(a, b, 0)]
    panels = 0
    while stack:
        lo, hi, depth = stack.pop()
        coarse, fine = panel(lo, hi)
        panels += 1
        share = (hi - lo) / total_width
        limit = max(tol * max(1.0, abs(fine)) * share, _ROUNDING * abs(fine))
        if abs(fine - coarse) <= limit or depth >= max_depth or panels >= max_panels:
            result += fine
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return sign * result
