"""Small statistical helpers used by the experiments and acceptance checks."""

from __future__ import annotations

import math
from statistics import NormalDist

import numpy as np
from scipy.special import ndtr
from scipy.stats import kstwobign


def mean_ci(samples, level: float = 0.95) -> tuple[float, float]:
    """Mean and normal-approximation half-width ``z sd / sqrt(N)``."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("need at least two samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite samples")
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    z = NormalDist().inv_cdf(0.5 + level / 2)
    return float(x.mean()), float(z * x.std(ddof=1) / math.sqrt(x.size))


def folded_normal_cdf(x, mu: float, sigma: float, a: float = 0.0):
    """CDF of ``a + |N(mu, sigma^2)|``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    d = x - a
    val = ndtr((d - mu) / sigma) - ndtr((-d - mu) / sigma)
    out = np.where(d < 0, 0.0, np.clip(val, 0.0, 1.0))
    return out if out.ndim else float(out)


def ks_statistic(samples, cdf) -> float:
    """``sup_x |F_N(x) - F(x)|`` for a continuous reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    """Asymptotic Kolmogorov critical value ``K_{1-alpha} / sqrt(n)``."""
    return float(kstwobign.isf(alpha) / math.sqrt(n))


def chi_square_gof(counts, expected_probs) -> tuple[float, int]:
    c = np.asarray(counts, dtype=float)
    p = np.asarray(expected_probs, dtype=float)
    if c.shape != p.shape:
        raise ValueError("shape mismatch")
    if np.any(p <= 0):
        raise ValueError("zero expected cell")
    if not math.isclose(p.sum(), 1.0, abs_tol=1e-9):
        raise ValueError("expected probabilities must sum to one")
    n = c.sum()
    if n <= 0:
        raise ValueError("no counts")
    e = n * p
    return float(((c - e) ** 2 / e).sum()), c.size - 1


def empirical_law(codes) -> dict:
    """Row-wise frequencies of an integer array as ``{tuple: probability}``."""
    codes = np.asarray(codes)
    keys, counts = np.unique(codes, axis=0, return_counts=True)
    total = codes.shape[0]
    return {tuple(int(v) for v in k): c / total for k, c in zip(keys, counts)}
