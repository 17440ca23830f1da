from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from logdens.comparators import (
    KZ_CUBIC,
    boundary_rp_density,
    cjm_kernel,
    epanechnikov,
    kz_density,
    kz_pilot_slope,
    kz_transform,
    loader_density,
    local_linear_kernel,
    ls_cjm_density,
    rp_density,
    rp_density_deriv,
)
from logdens.errors import ConfigurationError, EmptyWindow, NoConvergence, RankDeficient
from logdens.estimator import EvalRequest, Sample, estimate_density
from logdens.kernels import PS2


def brute_rp(data, x, h):
    return sum(0.75 * (1 - ((d - x) / h) ** 2) for d in data if abs(d - x) <= h) / (len(data) * h)


def test_rp_against_brute_force(fixture50):
    for x in (0.5, 1.0, 2.2):
        assert rp_density(fixture50, x, 0.6) == pytest.approx(brute_rp(fixture50.values, x, 0.6), rel=1e-13)
        eps = 1e-6
        fd = (rp_density(fixture50, x + eps, 0.6) - rp_density(fixture50, x - eps, 0.6)) / (2 * eps)
        assert rp_density_deriv(fixture50, x, 0.6) == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_boundary_rp(fixture50):
    for x in (0.8, 1.5):
        assert boundary_rp_density(fixture50, x, 0.7) == pytest.approx(rp_density(fixture50, x, 0.7), rel=1e-12)
    t = fixture50.window(0.0, 0.7) / 0.7
    ref = np.sum(6 * (1 - 2 * t) * (1 - t)) / (50 * 0.7)
    assert boundary_rp_density(fixture50, 0.0, 0.7) == pytest.approx(ref, rel=1e-12)


def test_equivalent_kernels_have_second_order():
    for z in (0.0, 0.5, 1.0):
        for k in (local_linear_kernel(z), cjm_kernel(z)):
            assert k.moment(0) == pytest.approx(1.0, abs=1e-12)
            assert k.moment(1) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(local_linear_kernel(1.0).coefficients(), [0.75, 0, -0.75], atol=1e-13)
    np.testing.assert_allclose(cjm_kernel(1.0).coefficients(), [15 / 16, 0, -15 / 8, 0, 15 / 16], atol=1e-12)


# -- LS-CJM --------------------------------------------------------------------

def test_ls_cjm_recovers_local_quadratic_cdf():
    # ECDF of an equally spaced design on [0, 1] is linear in the points: F = f x exactly
    pts = (np.arange(1, 2001) - 0.5) / 2000
    est = ls_cjm_density(Sample(pts), 0.5, 0.2)
    assert est.f == pytest.approx(1.0, rel=1e-3)
    assert est.f_prime == pytest.approx(0.0, abs=0.05)
    assert est.F == pytest.approx(0.5, abs=1e-3)


def test_ls_cjm_large_sample_exponential():
    s = Sample(np.random.default_rng(2).exponential(1.0, 400_000))
    est = ls_cjm_density(s, 0.0, 0.3)
    assert est.f == pytest.approx(1.0, abs=0.03)
    assert est.f_prime == pytest.approx(-1.0, abs=0.3)


def test_ls_cjm_rank_deficient():
    with pytest.raises(RankDeficient):
        ls_cjm_density(Sample([0.5, 0.5, 0.6]), 0.5, 0.3)


# -- KZ ------------------------------------------------------------------------

def test_kz_transform_monotone_and_identity():
    y = np.linspace(0, 5, 200)
    assert np.array_equal(kz_transform(y, 0.0), y)
    for d in (-3.0, -0.5, 0.7, 2.0):
        assert np.all(np.diff(kz_transform(y, d, KZ_CUBIC)) > 0)


def test_kz_zero_slope_is_simple_reflection(fixture50):
    h = 0.6
    for x in (0.0, 0.3):
        est = kz_density(fixture50, x, h, 0.3, d_hat=0.0)
        y = fixture50.values
        ref = (np.sum(epanechnikov((x - y) / h)) + np.sum(epanechnikov((x + y) / h))) / (50 * h)
        assert est.f == pytest.approx(ref, rel=1e-12)
    interior = kz_density(fixture50, 1.0, h, 0.3)
    assert interior.f == pytest.approx(rp_density(fixture50, 1.0, h), rel=1e-14)
    with pytest.raises(ConfigurationError):
        kz_density(fixture50, 0.0, h, 0.3, cubic=0.3)


def test_kz_integrates_to_one():
    s = Sample(np.random.default_rng(11).exponential(1.0, 100_000))
    h = 0.3
    grid = np.linspace(0, 12, 2401)
    vals = [kz_density(s, x, h, 0.15).f for x in grid]
    assert integrate.trapezoid(vals, grid) == pytest.approx(1.0, abs=0.02)


def test_kz_pilot_failure_is_flagged():
    s = Sample([3.0, 3.1, 3.2])
    assert kz_pilot_slope(s, 0.5) is None
    est = kz_density(s, 0.0, 0.5, 0.5)
    assert est.pilot_failed and est.d_hat == 0.0


def test_kz_pilot_slope_sign():
    s = Sample(np.random.default_rng(4).exponential(1.0, 200_000))
    assert kz_pilot_slope(s, 0.1) == pytest.approx(-1.0, abs=0.15)


# -- local likelihood -----------------------------------------------------------

def test_loader_close_to_ps2_interior():
    s = Sample(np.random.default_rng(6).exponential(1.0, 100_000))
    ld = loader_density(s, 1.0, 0.3)
    ps = estimate_density(s, EvalRequest(1.0, 0.3, family=PS2))
    assert abs(ld.f - ps.f_hat) / math.exp(-1.0) < 0.01
    assert ld.L_prime == pytest.approx(-1.0, abs=0.1)


def test_loader_score_equations_hold():
    s = Sample(np.random.default_rng(9).gamma(2.0, 1.0, 500))
    for x, h in [(0.0, 0.8), (0.4, 0.8), (2.0, 0.6)]:
        est = loader_density(s, x, h)
        z = min(x / h, 1.0)
        t = (s.window(x - z * h, x + h) - x) / h
        k = epanechnikov(t)
        b = est.L_prime * h
        for j in (0, 1):
            fitted = integrate.quad(lambda u: 0.75 * (1 - u * u) * u**j * est.f * math.exp(b * u), -z, 1.0)[0]
            assert np.sum(k * t**j) / (s.n * h) == pytest.approx(fitted, abs=1e-9)


def test_loader_errors():
    with pytest.raises(EmptyWindow):
        loader_density(Sample([5.0]), 0.0, 0.5)
    s = Sample(np.random.default_rng(1).exponential(1.0, 200))
    with pytest.raises(NoConvergence) as info:
        loader_density(s, 0.0, 0.5, max_iter=0, tol=1e-300)
    assert info.value.last_iterate is not None
