"""Configuration-model and preferential-growth multigraph samplers with exact laws."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from . import _kernels as K
from .multigraph import DENSE_MAX_N, Multigraph


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal/ratio string or float (binary value)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def double_factorial(k: int) -> int:
    """``k!!`` with ``0!! = (-1)!! = 1``."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def rising(x, k: int) -> Fraction:
    """Rising factorial ``x (x+1) ... (x+k-1)``."""
    x = as_fraction(x)
    out = Fraction(1)
    for i in range(k):
        out *= x + i
    return out


def _check_degrees(d) -> np.ndarray:
    d = np.asarray(d, dtype=np.int64)
    if d.ndim != 1:
        raise ValueError("degree sequence must be one-dimensional")
    if np.any(d < 0):
        raise ValueError("degrees must be non-negative")
    if int(d.sum()) % 2:
        raise ValueError("degree sum must be even")
    return d


def regular_degrees(n: int, c: float) -> np.ndarray:
    """Degrees ``floor(c n)``, with one vertex raised by one if the sum would be odd."""
    d = np.full(n, math.floor(c * n), dtype=np.int64)
    if int(d.sum()) % 2:
        d[-1] += 1
    return d


# ---------------------------------------------------------------- configuration model


def sample_cm(d, rng) -> Multigraph:
    """Uniform perfect matching of the half-edges of ``d``."""
    d = _check_degrees(d)
    stubs = rng.permutation(np.repeat(np.arange(d.size), d))
    g = Multigraph(d.size)
    g._reserve(stubs.size)
    for v, w in stubs.reshape(-1, 2).tolist():
        g.add_edge(v, w)
    return g


def cm_adjacency(d, rng) -> np.ndarray:
    """Adjacency of a configuration-model draw, built without the edge list."""
    d = _check_degrees(d)
    n = d.size
    stubs = rng.permutation(np.repeat(np.arange(n), d)).reshape(-1, 2)
    flat = np.bincount(stubs[:, 0] * n + stubs[:, 1], minlength=n * n).reshape(n, n)
    return flat + flat.T


def upper_index(n: int) -> np.ndarray:
    """``idx[i, j]`` = position of ``(min, max)`` in the row-major upper triangle."""
    idx = np.zeros((n, n), dtype=np.int64)
    k = 0
    for i in range(n):
        for j in range(i, n):
            idx[i, j] = idx[j, i] = k
            k += 1
    return idx


def sample_cm_codes(d, size: int, rng) -> np.ndarray:
    """``size`` independent draws, each as its upper-triangular adjacency row."""
    d = _check_degrees(d)
    n = d.size
    stubs = np.tile(np.repeat(np.arange(n), d), (size, 1))
    stubs = rng.permuted(stubs, axis=1).reshape(size, -1, 2)
    idx = upper_index(n)
    pos = idx[stubs[..., 0], stubs[..., 1]]
    inc = np.where(stubs[..., 0] == stubs[..., 1], 2, 1)
    out = np.zeros((size, n * (n + 1) // 2), dtype=np.int64)
    np.add.at(out, (np.arange(size)[:, None], pos), inc)
    return out


def cm_prob(g: Multigraph, d) -> Fraction:
    """Exact probability that the configuration model on ``d`` yields ``g``."""
    d = _check_degrees(d)
    if d.size != g.n or not np.array_equal(d, g.degrees):
        return Fraction(0)
    z = np.array(g.adj)
    m = int(d.sum()) // 2
    num = math.prod(math.factorial(int(x)) for x in d)
    den = double_factorial(2 * m - 1)
    for i in range(g.n):
        den *= double_factorial(int(z[i, i]))
        for j in range(i + 1, g.n):
            den *= math.factorial(int(z[i, j]))
    return Fraction(num, den)


# ---------------------------------------------------------------- growth model


@dataclass(frozen=True)
class GrowthParams:
    n: int
    theta: float
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.m < 0:
            raise ValueError("m must be non-negative")


def grow(params: GrowthParams, rng, start: Multigraph | None = None) -> Multigraph:
    """Add ``params.m`` edges one at a time with the preferential attachment law.

    Each new edge picks its first end with weight ``deg + theta`` and its
    second with weight ``deg + theta + [same vertex]``.
    """
    g = Multigraph(params.n) if start is None else start.copy()
    if g.n != params.n:
        raise ValueError("start graph has the wrong vertex count")
    if params.n > DENSE_MAX_N:
        raise ValueError("growth sampler needs dense storage")
    g._reserve(g.L + 2 * params.m)
    u = rng.random((params.m, 4))
    g._L = int(K.grow_block(g._adj, g._deg, g._ends, g.L, params.n, float(params.theta), u))
    return g


def grow_codes(params: GrowthParams, size: int, rng, chunk: int = 1 << 16) -> np.ndarray:
    """``size`` independent growth runs from the empty graph, as upper-triangular rows."""
    n = params.n
    out = np.zeros((size, n * (n + 1) // 2), dtype=np.int64)
    for lo in range(0, size, chunk):
        hi = min(size, lo + chunk)
        u = rng.random((hi - lo, params.m, 4))
        K.grow_many(n, float(params.theta), params.m, u, out[lo:hi])
    return out


def growth_graph_prob(g: Multigraph, theta) -> Fraction:
    """Exact probability that ``m = e + l`` growth steps from the empty graph produce ``g``."""
    theta = as_fraction(theta)
    n = g.n
    z = np.array(g.adj)
    m = g.num_entries
    num = Fraction(2**m * math.factorial(m))
    for x in g.degrees:
        num *= rising(theta, int(x))
    den = rising(n * theta, 2 * m)
    for i in range(n):
        den *= double_factorial(int(z[i, i]))
        for j in range(i + 1, n):
            den *= math.factorial(int(z[i, j]))
    return num / den


def growth_degree_prob(d, theta) -> Fraction:
    """Exact law of the degree vector after ``sum(d) / 2`` growth steps."""
    theta = as_fraction(theta)
    d = [int(x) for x in d]
    if any(x < 0 for x in d):
        raise ValueError("degrees must be non-negative")
    total = sum(d)
    if total % 2:
        raise ValueError("degree sum must be even")
    out = Fraction(math.factorial(total)) / rising(len(d) * theta, total)
    for x in d:
        out *= rising(theta, x) / math.factorial(x)
    return out


def nb_success(n: int, m: int, theta) -> float:
    return 2 * m / (2 * m + n * float(theta))


def nb_pmf(r: int, theta, p: float) -> float:
    """Negative binomial ``(1-p)^theta p^r theta^(r) / r!``."""
    theta = float(theta)
    if r < 0:
        return 0.0
    if p == 0:
        return 1.0 if r == 0 else 0.0
    logp = (theta * math.log1p(-p) + r * math.log(p)
            + math.lgamma(theta + r) - math.lgamma(theta) - math.lgamma(r + 1))
    return math.exp(logp)


def compositions(total: int, parts: int) -> Iterator[tuple]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def nb_conditional_degree_law(n: int, m: int, theta) -> dict[tuple, Fraction]:
    """Law of i.i.d. negative binomials conditioned on summing to ``2m``.

    The common factor ``(1-p)^(n theta)`` cancels in the conditioning, so
    the weights stay rational.
    """
    theta = as_fraction(theta)
    p = Fraction(2 * m) / (2 * m + n * theta) if m else Fraction(0)
    weights = {}
    for d in compositions(2 * m, n):
        w = Fraction(1)
        for x in d:
            w *= p**x * rising(theta, x) / math.factorial(x)
        weights[d] = w
    total = sum(weights.values())
    return {d: w / total for d, w in weights.items()}
