import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps
from scipy.special import exp1

from mgdyn.limit import (LimitParams, degenerate_ind_density, degenerate_kernel, degree_u_statistic,
                         expected_ind_density_at_time, folded_normal_mean, gamma_cdf, gamma_quantile,
                         poisson_pmf, poisson_tail, psi_expectation, sample_y, static_limit_kernel, u_statistic,
                         y_cdf)
from mgdyn.multigraph import K2, Pattern, loop_pattern
from mgdyn.multigraphon import erased_graphon, ind_density_mc
from mgdyn.stats import ks_critical, ks_statistic


def test_poisson_examples():
    assert poisson_pmf(0, 0.0) == 1.0
    assert poisson_pmf(3, 0.0) == 0.0
    assert poisson_pmf(2, 1.5) == pytest.approx(math.exp(-1.5) * 1.5**2 / 2, rel=1e-14)
    assert poisson_pmf(-1, 1.0) == 0.0
    with pytest.raises(ValueError):
        poisson_pmf(1, -0.1)
    lam = np.array([0.1, 1.0, 7.5, 40.0])
    for r in (0, 1, 3, 10, 50):
        assert np.allclose(poisson_tail(r, lam), sps.poisson.sf(r - 1, lam), rtol=1e-10, atol=1e-300)


def test_gamma_quantile_examples():
    u = np.array([0.0, 0.1, 0.5, 0.9, 0.999])
    assert np.allclose(gamma_quantile(u, 1.0), -np.log1p(-u), rtol=1e-12)
    assert gamma_quantile(1.0, 2.0) == np.inf
    with pytest.raises(ValueError):
        gamma_quantile(1.5, 1.0)
    for th in (0.3, 0.5, 2.0, 7.0):
        ref = sps.gamma.ppf(u[1:], th, scale=1 / th)
        assert np.allclose(gamma_quantile(u[1:], th), ref, rtol=1e-9)


def test_poisson_series_sums_to_one():
    assert sum(poisson_pmf(r, 5.0) for r in range(51)) == pytest.approx(1.0, abs=1e-12)


def test_gamma_quantile_closed_form_point():
    assert gamma_quantile(1 - math.exp(-1), 1.0) == pytest.approx(1.0, abs=1e-10)
    assert gamma_cdf(gamma_quantile(0.5, 2.0), 2.0) == pytest.approx(0.5, abs=1e-10)
    assert gamma_quantile(0.0, 0.7) == 0.0


@given(st.floats(0.05, 10), st.floats(1e-8, 1 - 1e-8), st.floats(1e-8, 1 - 1e-8))
def test_gamma_quantile_monotone_and_inverse(th, u1, u2):
    lo, hi = sorted((u1, u2))
    assert gamma_quantile(lo, th) <= gamma_quantile(hi, th)
    assert gamma_cdf(gamma_quantile(lo, th), th) == pytest.approx(lo, abs=1e-10)
    assert gamma_cdf(gamma_quantile(hi, th), th) == pytest.approx(hi, abs=1e-10)


def test_degenerate_kernel_closed_form(rng):
    c = 0.5
    h = degenerate_kernel(c)
    x, y = rng.random(50), rng.random(50)
    assert np.allclose(h.eval(1, x, y), c * math.exp(-c))
    assert np.allclose(h.eval(2, x, x), c / 2 * math.exp(-c / 2))
    assert np.all(h.eval(1, x, x) == 0)
    assert degenerate_ind_density(K2(1), c) == pytest.approx(c * math.exp(-2 * c))
    assert degenerate_ind_density(K2(1), c, diagonal=False) == pytest.approx(c * math.exp(-c))
    assert degenerate_ind_density(loop_pattern(1), c) == pytest.approx(c / 2 * math.exp(-c / 2))
    e = ind_density_mc(h, K2(1), 1000, rng)
    assert e.value == pytest.approx(degenerate_ind_density(K2(1), c), rel=1e-12)


def test_static_kernel_normalized_at_a_point():
    h = static_limit_kernel(1.3, 1.0)
    assert sum(float(h.eval(r, 0.3, 0.7)) for r in range(200)) == pytest.approx(1.0, abs=1e-9)


def test_erased_degenerate_kernel(rng):
    assert erased_graphon(degenerate_kernel(0.5))(0.2, 0.7) == pytest.approx(1 - math.exp(-0.5))


def test_kernel_rejects_bad_intensity():
    with pytest.raises(ValueError):
        static_limit_kernel(0.0, 1.0)
    with pytest.raises(ValueError):
        static_limit_kernel(1.0, -1.0)


def test_limit_params_validation():
    with pytest.raises(ValueError):
        LimitParams(theta=1, a=0, rho0=1)
    with pytest.raises(ValueError):
        LimitParams(theta=1, a=0.5, rho0=0.4)
    with pytest.raises(ValueError):
        LimitParams(theta=0, a=0.1, rho0=1)


def test_sample_y_start_and_mean(rng):
    p = LimitParams(theta=1.0, a=0.25, rho0=0.5)
    assert np.all(sample_y(p, [0.0], 100, rng) == 0.5)
    with pytest.raises(ValueError):
        sample_y(p, [1.0, 0.5], 10, rng)
    y = sample_y(p, [0.25, 1.0], 100_000, rng)
    assert np.all(y >= p.a)
    for k, s in enumerate((0.25, 1.0)):
        ref = p.a + folded_normal_mean(p.rho0 - p.a, 2.0 * math.sqrt(s))
        assert abs(y[:, k].mean() - ref) < 4 * y[:, k].std() / math.sqrt(y.shape[0])
        assert ks_statistic(y[:, k], lambda v: y_cdf(v, p, s)) < ks_critical(y.shape[0], 0.001)


def test_y_diffusion_scales_spread(rng):
    p = LimitParams(theta=1.0, a=0.25, rho0=0.5)
    y = sample_y(p, [1.0], 100_000, rng, diffusion=2 * math.sqrt(2))[:, 0]
    assert ks_statistic(y, lambda v: y_cdf(v, p, 1.0, 2 * math.sqrt(2))) < ks_critical(y.size, 0.001)


def test_folded_normal_mean_examples():
    assert folded_normal_mean(0.0, 1.0) == pytest.approx(math.sqrt(2 / math.pi))
    assert folded_normal_mean(-3.0, 0.0) == 3.0
    assert folded_normal_mean(50.0, 1.0) == pytest.approx(50.0)


def test_psi_single_loop_against_quadrature(rng):
    # one vertex with one loop: E[Poisson(y w^2 / 2) = 1] for exponential w
    t, w = np.polynomial.legendre.leggauss(256)
    x = -np.log1p(-(t + 1) / 2)
    lam = 1.5 * x**2 / 2
    ref = float(np.sum(w / 2 * lam * np.exp(-lam)))
    e = psi_expectation(loop_pattern(1), 1.5, 1.0, 1_000_000, rng)
    assert abs(e.value - ref) < 5 * e.stderr


def gauss_legendre_k2_0(points=256, diagonal=True):
    t, w = np.polynomial.legendre.leggauss(points)
    u = (t + 1) / 2
    w = w / 2
    x = -np.log1p(-u)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    f = np.exp(-x1 * x2)
    if diagonal:
        f = f * np.exp(-x1**2 / 2 - x2**2 / 2)
    return float(np.einsum("i,j,ij->", w, w, f))


def test_psi_k2_0_against_quadrature(rng):
    # exponential weights, intensity one
    loop_blind = psi_expectation(K2(0), 1.0, 1.0, 2_000_000, rng, diagonal=False)
    assert abs(loop_blind.value - gauss_legendre_k2_0(diagonal=False)) < 5 * loop_blind.stderr
    # E[1 / (1 + w)] for exponential w is e E1(1)
    assert gauss_legendre_k2_0(diagonal=False) == pytest.approx(math.e * exp1(1.0), abs=1e-6)
    strict = psi_expectation(K2(0), 1.0, 1.0, 2_000_000, rng)
    assert abs(strict.value - gauss_legendre_k2_0()) < 5 * strict.stderr


def test_u_statistic_examples(rng):
    x = [1.0, 2.0, 3.0]
    four = [1.0, 2.0, 3.0, 5.0]
    pairs = [a * b for i, a in enumerate(four) for j, b in enumerate(four) if i != j]
    assert len(pairs) == 12
    assert u_statistic(lambda a, b: a * b, four, 2).value == pytest.approx(sum(pairs) / 12)
    e = u_statistic(lambda a, b: a * b, x, 2)
    assert e.stderr == 0
    assert e.value == pytest.approx(22 / 6)
    with pytest.raises(ValueError):
        u_statistic(lambda a: a, x, 4)
    big = np.arange(200, dtype=float)
    with pytest.raises(ValueError):
        u_statistic(lambda a, b, c: a, big, 3, budget=10)
    s = u_statistic(lambda a, b, c: a + b + c, big, 3, budget=10, n_samples=100_000, rng=rng)
    assert abs(s.value - 3 * big.mean()) < 5 * s.stderr


def test_degree_u_statistic_regular_is_degenerate():
    d = [2] * 6
    e = degree_u_statistic(K2(1), d)
    assert e.value == pytest.approx(degenerate_ind_density(K2(1), 2 / 6), rel=1e-12)


def test_expected_density_at_time_zero(rng):
    p = LimitParams(theta=1.0, a=0.2, rho0=0.5)
    e = expected_ind_density_at_time(K2(1), 0.0, p, 400, 2000, rng)
    ref = psi_expectation(K2(1), 0.5, 1.0, 800_000, rng)
    assert abs(e.value - ref.value) < 5 * math.hypot(e.stderr, ref.stderr)
    assert e.extra["n_outer"] == 400
