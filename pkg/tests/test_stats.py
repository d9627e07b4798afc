import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import ndtr

from mgdyn.stats import chi_square_gof, empirical_law, folded_normal_cdf, ks_critical, ks_statistic, mean_ci


def test_mean_ci_example():
    m, hw = mean_ci([0, 2])
    assert m == 1
    assert hw == pytest.approx(1.959963984540054)


def test_mean_ci_degenerate_cases():
    assert mean_ci([3.0, 3.0, 3.0]) == (3.0, 0.0)
    assert mean_ci([0, 2], level=0.0)[1] == 0.0


def test_mean_ci_errors():
    with pytest.raises(ValueError):
        mean_ci([1.0])
    with pytest.raises(ValueError):
        mean_ci([1.0, float("nan")])
    with pytest.raises(ValueError):
        mean_ci([1.0, 2.0], level=1.0)


def test_chi_square_example():
    assert chi_square_gof([60, 40], [0.5, 0.5]) == (4.0, 1)
    assert chi_square_gof([30, 10], [0.75, 0.25]) == (0.0, 1)
    assert chi_square_gof([7], [1.0]) == (0.0, 0)
    with pytest.raises(ValueError):
        chi_square_gof([1, 1], [1.0, 0.0])
    with pytest.raises(ValueError):
        chi_square_gof([1, 1], [0.5, 0.4])


def test_folded_normal_cdf_examples():
    assert folded_normal_cdf(0.3, 0.5, 1.0, a=0.3) == 0.0
    assert folded_normal_cdf(0.2, 0.5, 1.0, a=0.3) == 0.0
    assert folded_normal_cdf(1e9, 0.5, 1.0) == 1.0
    # |N(0, 1)| at 1.96
    assert folded_normal_cdf(1.959963984540054, 0.0, 1.0) == pytest.approx(0.95)
    with pytest.raises(ValueError):
        folded_normal_cdf(1.0, 0.0, 0.0)


@given(st.floats(-3, 3), st.floats(0.1, 4), st.floats(0, 2), st.floats(0, 10), st.floats(0, 10))
def test_folded_normal_cdf_monotone(mu, sigma, a, x1, x2):
    lo, hi = sorted((x1, x2))
    f = folded_normal_cdf(np.array([lo, hi]), mu, sigma, a)
    assert 0 <= f[0] <= f[1] <= 1


def test_ks_self_consistency(rng):
    x = rng.standard_normal(20_000)
    d = ks_statistic(x, ndtr)
    assert d < ks_critical(x.size, 0.001)
    assert ks_critical(100, 0.05) == pytest.approx(1.3580986393225505 / 10, rel=1e-9)


def test_ks_rejection_rate_under_null():
    crit = ks_critical(10_000, 0.01)
    passes = sum(ks_statistic(np.random.default_rng(k).standard_normal(10_000), ndtr) < crit for k in range(100))
    assert passes >= 98


def test_ks_detects_support_violation(rng):
    x = rng.random(1000) - 0.5
    d = ks_statistic(x, lambda v: folded_normal_cdf(v, 0.0, 1.0))
    assert d >= 0.5 - 1e-12
    assert d > ks_critical(x.size)
    with pytest.raises(ValueError):
        ks_statistic([], lambda v: v)


def test_empirical_law():
    law = empirical_law([[0, 1], [0, 1], [2, 0], [0, 1]])
    assert law == {(0, 1): 0.75, (2, 0): 0.25}
