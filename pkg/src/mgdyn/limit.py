"""Poisson/Gamma multigraphon limits of the static and dynamic models.

The kernel at intensity ``y`` puts a Poisson number of edges with mean
``y w(x) w(x')`` between types ``x`` and ``x'`` and a Poisson number of
loops with mean ``y w(x)^2 / 2`` at type ``x``, where ``w`` is the quantile
function of Gamma(theta, rate theta).  In the dynamic model ``y`` follows a
Brownian motion reflected at ``a``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit, vectorize
from scipy.special import gammaln

from .estimate import Estimate
from .multigraph import Pattern, sample_injections
from .multigraphon import Multigraphon
from .stats import folded_normal_cdf

DEFAULT_DIFFUSION = 2.0


# ---------------------------------------------------------------- special functions


@njit(cache=True)
def _gamma_p(s, x):
    """Regularized lower incomplete gamma P(s, x)."""
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    lead = -x + s * math.log(x) - math.lgamma(s)
    if x < s + 1.0:
        term = 1.0 / s
        total = term
        k = 1.0
        while True:
            term *= x / (s + k)
            total += term
            k += 1.0
            if abs(term) < abs(total) * 1e-17 or k > 100000.0:
                break
        return min(1.0, total * math.exp(lead))
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    i = 1.0
    while True:
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        i += 1.0
        if abs(delta - 1.0) < 1e-16 or i > 100000.0:
            break
    return max(0.0, 1.0 - math.exp(lead) * h)


@vectorize(["float64(float64, float64)"], cache=True)
def regularized_gamma_p(s, x):
    return _gamma_p(s, x)


@njit(cache=True)
def _gamma_quantile(u, theta):
    # solve P(theta, theta * y) = u for y
    if u <= 0.0:
        return 0.0
    if u >= 1.0:
        return math.inf
    hi = max(1.0, theta)
    while _gamma_p(theta, hi) < u:
        hi *= 2.0
    lo = hi
    while lo > 1e-300 and _gamma_p(theta, lo) >= u:
        lo *= 0.0625
    if lo <= 1e-300:
        return 0.0
    t = math.sqrt(lo * hi)
    lg = math.lgamma(theta)
    for _ in range(400):
        f = _gamma_p(theta, t) - u
        if f == 0.0:
            break
        if f > 0.0:
            hi = t
        else:
            lo = t
        dens = math.exp(-t + (theta - 1.0) * math.log(t) - lg)
        nxt = t - f / dens if dens > 0.0 else -1.0
        if not (lo < nxt < hi):
            # geometric midpoint copes with brackets spanning many decades
            nxt = math.sqrt(lo * hi) if hi > 2.0 * lo else 0.5 * (lo + hi)
        if abs(nxt - t) <= 1e-15 * t or hi - lo <= 1e-15 * hi:
            t = nxt
            break
        t = nxt
    return t / theta


@vectorize(["float64(float64, float64)"], cache=True)
def _gamma_quantile_v(u, theta):
    return _gamma_quantile(u, theta)


def gamma_cdf(x, theta):
    """CDF of Gamma(theta, rate theta), the law with mean one."""
    x = np.asarray(x, dtype=float)
    return regularized_gamma_p(float(theta), float(theta) * x)


def gamma_quantile(u, theta):
    """Generalized inverse of :func:`gamma_cdf`; ``0 -> 0`` and ``1 -> inf``."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("quantile level outside [0, 1]")
    return _gamma_quantile_v(u, float(theta))


def poisson_pmf(r, lam):
    """``exp(-lam) lam^r / r!``, vectorized in both arguments."""
    r = np.asarray(r)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("Poisson mean must be non-negative")
    r_f = r.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = -lam + r_f * np.log(lam) - gammaln(r_f + 1.0)
        out = np.exp(logp)
    out = np.where(lam == 0, (r == 0).astype(float), out)
    out = np.where(np.isinf(lam), 0.0, out)
    out = np.where(r < 0, 0.0, out)
    return out if out.ndim else float(out)


def poisson_tail(r, lam):
    """``P(Poisson(lam) >= r)`` via the incomplete gamma identity, no subtraction of sums."""
    lam = np.asarray(lam, dtype=float)
    if r <= 0:
        return np.ones(lam.shape) if lam.ndim else 1.0
    out = regularized_gamma_p(float(r), lam)
    return out


# ---------------------------------------------------------------- kernels


class GammaQuantile:
    def __init__(self, theta: float):
        if not theta > 0:
            raise ValueError("theta must be positive")
        self.theta = float(theta)

    def __call__(self, u):
        return gamma_quantile(u, self.theta)


def unit_quantile(u):
    return np.ones(np.shape(u))


class PoissonGammaKernel(Multigraphon):
    """Poisson edge counts with mean ``y w(x) w(x')``; loops Poisson with mean ``y w(x)^2 / 2``."""

    def __init__(self, y: float, quantile: Callable = unit_quantile):
        if not y > 0:
            raise ValueError("intensity must be positive")
        self.y = float(y)
        self.quantile = quantile

    def _weights(self, x):
        w = np.asarray(self.quantile(x), dtype=float)
        if np.any(np.isinf(w)):
            raise ValueError("kernel evaluated at a type with infinite weight")
        return w

    def _means(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return x == y, self.y * self._weights(x) * self._weights(y)

    def eval(self, r, x, y):
        diag, lam = self._means(x, y)
        off = poisson_pmf(r, lam)
        on = poisson_pmf(r // 2, lam / 2) if r % 2 == 0 else np.zeros(lam.shape)
        return np.where(diag, on, off)

    def tail(self, r, x, y):
        diag, lam = self._means(x, y)
        return np.where(diag, poisson_tail((r + 1) // 2, lam / 2), poisson_tail(r, lam))


def static_limit_kernel(y: float, theta: float) -> PoissonGammaKernel:
    return PoissonGammaKernel(y, GammaQuantile(theta))


def degenerate_kernel(c: float) -> PoissonGammaKernel:
    """Limit for constant degrees ``floor(c n)``: all types have weight one."""
    return PoissonGammaKernel(c, unit_quantile)


def degenerate_ind_density(F: Pattern, c: float, diagonal: bool = True) -> float:
    """Closed form of the induced density of ``F`` in :func:`degenerate_kernel`."""
    out = 1.0
    for i, j, a in F.pairs():
        if i != j:
            out *= poisson_pmf(a, c)
        elif diagonal:
            out *= poisson_pmf(a // 2, c / 2) if a % 2 == 0 else 0.0
    return float(out)


# ---------------------------------------------------------------- intensity path


@dataclass(frozen=True)
class LimitParams:
    theta: float
    a: float
    rho0: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.rho0 >= self.a:
            raise ValueError("rho0 must be at least a")


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("times must be sorted and non-negative")
    return t


def sample_y(params: LimitParams, times, size: int, rng, diffusion: float = DEFAULT_DIFFUSION) -> np.ndarray:
    """``size`` joint draws of ``Y(s) = a + |c B(s) + rho0 - a|`` at ``times``; shape (size, len(times)).

    ``c = diffusion`` (two by default).
    """
    t = _check_times(times)
    dt = np.diff(np.concatenate([[0.0], t]))
    b = np.cumsum(rng.standard_normal((size, t.size)) * np.sqrt(dt), axis=1)
    return params.a + np.abs(diffusion * b + params.rho0 - params.a)


def sample_limit_path(params: LimitParams, times, rng, diffusion: float = DEFAULT_DIFFUSION):
    """One path of the intensity and the limit kernel at each time."""
    y = sample_y(params, times, 1, rng, diffusion)[0]
    q = GammaQuantile(params.theta)
    return y, [PoissonGammaKernel(v, q) for v in y]


def folded_normal_mean(mu: float, sigma: float) -> float:
    if sigma == 0:
        return abs(mu)
    phi = 0.5 * math.erfc(mu / sigma / math.sqrt(2))
    return sigma * math.sqrt(2 / math.pi) * math.exp(-mu * mu / (2 * sigma * sigma)) + mu * (1 - 2 * phi)


def y_cdf(x, params: LimitParams, s: float, diffusion: float = DEFAULT_DIFFUSION):
    """CDF of ``Y(s)``."""
    sigma = diffusion * math.sqrt(s)
    return folded_normal_cdf(x, params.rho0 - params.a, sigma, params.a)


# ---------------------------------------------------------------- limit expectations


def _psi_factor(F: Pattern, y, zeta, diagonal=True) -> np.ndarray:
    # y broadcasts against zeta[i]
    out = np.ones(np.broadcast_shapes(np.shape(y), zeta.shape[1:]))
    for i, j, a in F.pairs():
        if i != j:
            out = out * poisson_pmf(a, y * zeta[i] * zeta[j])
        elif diagonal:
            out = out * poisson_pmf(a // 2, y * zeta[i] ** 2 / 2)
    return out


def _has_odd_loop(F: Pattern) -> bool:
    return any(i == j and a % 2 for i, j, a in F.pairs())


def psi_expectation(F: Pattern, y: float, theta: float, N: int, rng, diagonal: bool = True) -> Estimate:
    """``E f(zeta; y)`` with ``zeta_i`` i.i.d. Gamma(theta, rate theta), drawn by numpy's gamma sampler."""
    if diagonal and _has_odd_loop(F):
        return Estimate.exact(0.0)
    zeta = rng.gamma(theta, 1.0 / theta, size=(F.k, N))
    return Estimate.from_samples(_psi_factor(F, y, zeta, diagonal))


def expected_ind_density_at_time(F: Pattern, s: float, params: LimitParams, N_outer: int,
                                 N_inner: int, rng, diagonal: bool = True,
                                 diffusion: float = DEFAULT_DIFFUSION) -> Estimate:
    """Nested Monte Carlo for ``E t^ind_F(kernel at Y(s))``.

    The reported stderr comes from the spread of the ``N_outer`` conditional
    means, which accounts for both levels of sampling.
    """
    if diagonal and _has_odd_loop(F):
        return Estimate.exact(0.0)
    y = sample_y(params, [s], N_outer, rng, diffusion)[:, 0]
    means = np.empty(N_outer)
    within = np.empty(N_outer)
    chunk = max(1, 2_000_000 // max(1, N_inner * F.k))
    for lo in range(0, N_outer, chunk):
        hi = min(N_outer, lo + chunk)
        zeta = rng.gamma(params.theta, 1.0 / params.theta, size=(F.k, hi - lo, N_inner))
        vals = _psi_factor(F, y[lo:hi, None], zeta, diagonal)
        means[lo:hi] = vals.mean(axis=1)
        within[lo:hi] = vals.var(axis=1, ddof=1) if N_inner > 1 else 0.0
    est = Estimate.from_samples(means)
    return Estimate(est.value, est.stderr, N_outer * N_inner, None,
                    {"between_var": float(means.var(ddof=1)) if N_outer > 1 else 0.0,
                     "within_var": float(within.mean()),
                     "n_outer": N_outer, "n_inner": N_inner})


def u_statistic(f: Callable, x, k: int, budget: int = 2_000_000, n_samples: int = 200_000,
                rng=None) -> Estimate:
    """Average of ``f`` over all injections ``[k] -> [n]``.

    ``f`` receives ``k`` arrays (one per argument) and returns an array.
    Exact when ``(n)_k <= budget``; otherwise uniform injections are sampled.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if k > n:
        raise ValueError("k exceeds the number of points")
    total = math.perm(n, k)
    if total <= budget:
        idx = np.array(list(itertools.permutations(range(n), k)), dtype=np.int64).reshape(-1, k)
        vals = np.asarray(f(*(x[idx[:, i]] for i in range(k))), dtype=float)
        return Estimate.exact(vals.mean() if vals.size else 0.0, total)
    if rng is None:
        raise ValueError("rng required when sampling")
    idx = sample_injections(n, k, n_samples, rng).T
    vals = np.asarray(f(*(x[idx[:, i]] for i in range(k))), dtype=float)
    return Estimate.from_samples(vals)


def degree_u_statistic(F: Pattern, degrees, diagonal: bool = True, **kw) -> Estimate:
    """U-statistic of ``f(.; y)`` over normalized degrees ``D_i / (n y)`` with ``y = sum(D) / n^2``."""
    d = np.asarray(degrees, dtype=float)
    n = d.size
    y = d.sum() / n**2
    xbar = d / (n * y)

    def f(*cols):
        return _psi_factor(F, y, np.stack(cols), diagonal)

    return u_statistic(f, xbar, F.k, **kw)
