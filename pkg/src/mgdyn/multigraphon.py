"""Multigraphon evaluators and their density functionals.

A multigraphon assigns to each point ``(x, y)`` of the unit square a
probability distribution ``r -> h(r; x, y)`` over edge multiplicities.
On the diagonal it describes loops, so odd ``r`` carry no mass there.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable

import numpy as np

from .estimate import Estimate
from .multigraph import Multigraph, Pattern, hom_density, pattern_list

DEFAULT_N = 100_000
DEFAULT_R_MAX = 32


class Multigraphon:
    """Evaluator interface.  ``eval`` and ``tail`` are vectorized in ``x`` and ``y``."""

    support_bound: int | None = None

    def eval(self, r: int, x, y) -> np.ndarray:
        raise NotImplementedError

    def tail(self, r: int, x, y) -> np.ndarray:
        """``sum_{s >= r} h(s; x, y)``."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        out = np.ones(x.shape)
        for s in range(r):
            out -= self.eval(s, x, y)
        return np.clip(out, 0.0, 1.0)


class FunctionMultigraphon(Multigraphon):
    """Wraps a vectorized callable ``fn(r, x, y)``."""

    def __init__(self, fn: Callable, support_bound: int | None = None):
        self._fn = fn
        self.support_bound = support_bound

    def eval(self, r, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        return np.asarray(self._fn(r, x, y), dtype=float) * np.ones(x.shape)


def _cell(x, n):
    c = np.ceil(np.asarray(x, float) * n).astype(np.int64) - 1
    return np.clip(c, 0, n - 1)


class StepMultigraphon(Multigraphon):
    """``h^G(r; x, y) = 1[z_{ceil(nx), ceil(ny)} = r]``."""

    def __init__(self, g: Multigraph):
        if g.n < 1:
            raise ValueError("step multigraphon needs at least one vertex")
        self.graph = g
        self._z = np.array(g.adj)
        self.support_bound = int(self._z.max()) if self._z.size else 0

    @property
    def n(self):
        return self.graph.n

    def values(self, x, y):
        return self._z[_cell(x, self.n), _cell(y, self.n)]

    def eval(self, r, x, y):
        return (self.values(x, y) == r).astype(float)

    def tail(self, r, x, y):
        return (self.values(x, y) >= r).astype(float)


class SimpleGraphonMultigraphon(Multigraphon):
    """Simple graphon ``w`` as a multigraphon with ``h(1) = w``, ``h(0) = 1 - w`` and no loops."""

    support_bound = 1

    def __init__(self, w: Callable):
        self._w = w

    def eval(self, r, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        w = np.asarray(self._w(x, y), dtype=float) * np.ones(x.shape)
        on_diag = x == y
        if r == 0:
            return np.where(on_diag, 1.0, 1.0 - w)
        if r == 1:
            return np.where(on_diag, 0.0, w)
        return np.zeros(x.shape)


class TruncatedMultigraphon(Multigraphon):
    """Two-level truncation: keeps ``h(0)`` off the diagonal, lumps all ``r >= 1`` into ``r = 1``, drops loops."""

    support_bound = 1

    def __init__(self, h: Multigraphon):
        self._h = h

    def eval(self, r, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        on_diag = x == y
        if r == 0:
            return np.where(on_diag, 1.0, self._h.eval(0, x, y))
        if r == 1:
            return np.where(on_diag, 0.0, self._h.tail(1, x, y))
        return np.zeros(x.shape)


class ErasedGraphon:
    """``x, y -> h.tail(1, x, y)``: probability of at least one edge."""

    def __init__(self, h: Multigraphon):
        self._h = h

    def __call__(self, x, y):
        return self._h.tail(1, x, y)


def erased_graphon(h: Multigraphon) -> ErasedGraphon:
    return ErasedGraphon(h)


def check_axioms(h: Multigraphon, rng, probes: int = 1000, r_max: int = 20_000, atol: float = 1e-9) -> None:
    """Assert symmetry, normalization and the odd-diagonal rule at random points."""
    x = rng.random(probes)
    y = rng.random(probes)
    r = rng.integers(0, 20, probes)
    for ri in np.unique(r):
        sel = r == ri
        a = h.eval(int(ri), x[sel], y[sel])
        b = h.eval(int(ri), y[sel], x[sel])
        if not np.allclose(a, b, atol=atol, rtol=0):
            raise AssertionError(f"asymmetric at r={ri}")
        if np.any(a < -atol) or np.any(a > 1 + atol):
            raise AssertionError(f"value outside [0, 1] at r={ri}")
        if ri % 2 == 1 and np.any(np.abs(h.eval(int(ri), x[sel], x[sel])) > atol):
            raise AssertionError(f"odd diagonal mass at r={ri}")
    for xs, ys in ((x, y), (x, x)):
        # heavy diagonals can put most of their mass far out, so sum until it stops moving
        total = np.zeros(probes)
        for s in range(r_max + 1):
            total += h.eval(s, xs, ys)
            if s >= 20 and s % 20 == 0 and np.allclose(total, 1.0, atol=1e-8, rtol=0):
                break
        if not np.allclose(total, 1.0, atol=1e-8, rtol=0):
            raise AssertionError("multiplicities do not sum to one")


# ---------------------------------------------------------------- densities


def _uniforms(k, N, rng, u):
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape[0] < k:
            raise ValueError("not enough uniform rows for pattern")
        return u[:k]
    if rng is None:
        raise ValueError("need rng or u")
    return rng.random((k, N))


def _hom_factor(h, F: Pattern, U) -> np.ndarray:
    out = np.ones(U.shape[1])
    for i, j, a in F.pairs():
        if a:
            out *= h.tail(a, U[i], U[j])
    return out


def _ind_factor(h, F: Pattern, U, diagonal=True) -> np.ndarray:
    out = np.ones(U.shape[1])
    for i, j, a in F.pairs():
        if i == j and not diagonal:
            continue
        out *= h.eval(a, U[i], U[j])
    return out


def hom_density_mc(h: Multigraphon, F: Pattern, N: int = DEFAULT_N, rng=None, u=None) -> Estimate:
    """Monte Carlo estimate of ``t_F(h) = E prod_{i<=j} tail(a_ij; U_i, U_j)``."""
    U = _uniforms(F.k, N, rng, u)
    return Estimate.from_samples(_hom_factor(h, F, U))


def ind_density_mc(h: Multigraphon, F: Pattern, N: int = DEFAULT_N, rng=None, u=None,
                   diagonal: bool = True) -> Estimate:
    """Monte Carlo estimate of ``E prod_{i<=j} h(a_ij; U_i, U_j)``.

    ``diagonal=False`` drops the loop factors, matching
    :func:`mgdyn.multigraph.ind_density` with the same flag.
    """
    U = _uniforms(F.k, N, rng, u)
    return Estimate.from_samples(_ind_factor(h, F, U, diagonal))


# ---------------------------------------------------------------- exact step integrals


def _refinement(n1: int, n2: int):
    """Common refinement of two uniform partitions: (lengths, cell1, cell2)."""
    cuts = sorted({Fraction(i, n1) for i in range(n1 + 1)} | {Fraction(j, n2) for j in range(n2 + 1)})
    lengths, c1, c2 = [], [], []
    for lo, hi in zip(cuts, cuts[1:]):
        mid = (lo + hi) / 2
        lengths.append(hi - lo)
        c1.append(math.ceil(mid * n1) - 1)
        c2.append(math.ceil(mid * n2) - 1)
    return lengths, c1, c2


def step_d_sq_dg(g1: Multigraph, g2: Multigraph, r: int) -> tuple[Fraction, Fraction]:
    """Exact ``d_sq`` and ``d_dg`` between the tails ``h^{>= r}`` of two step multigraphons."""
    lengths, c1, c2 = _refinement(g1.n, g2.n)
    t1 = np.array(g1.adj) >= r
    t2 = np.array(g2.adj) >= r
    sq = Fraction(0)
    dg = Fraction(0)
    for a, la in enumerate(lengths):
        if t1[c1[a], c1[a]] != t2[c2[a], c2[a]]:
            dg += la
        for b, lb in enumerate(lengths):
            if t1[c1[a], c1[b]] != t2[c2[a], c2[b]]:
                sq += la * lb
    return sq, dg


def step_pair_law(g: Multigraph, r: int) -> Fraction:
    """``int h^G(r; x, y) dx dy``; diagonal blocks count with value ``z_ii``."""
    z = np.array(g.adj)
    return Fraction(int((z == r).sum()), g.n**2)


def step_loop_law(g: Multigraph, r: int) -> Fraction:
    """``int h^G(2r; x, x) dx``."""
    return Fraction(int((np.diag(np.array(g.adj)) == 2 * r).sum()), g.n)


def d_sq_dg(h1: Multigraphon, h2: Multigraphon, r: int, N: int = DEFAULT_N, rng=None) -> tuple[Estimate, Estimate]:
    """Estimates of ``int |tail1 - tail2|`` over the square and over the diagonal."""
    if isinstance(h1, StepMultigraphon) and isinstance(h2, StepMultigraphon):
        sq, dg = step_d_sq_dg(h1.graph, h2.graph, r)
        return Estimate.exact(sq), Estimate.exact(dg)
    U = rng.random((2, N))
    sq = np.abs(h1.tail(r, U[0], U[1]) - h2.tail(r, U[0], U[1]))
    dg = np.abs(h1.tail(r, U[0], U[0]) - h2.tail(r, U[0], U[0]))
    return Estimate.from_samples(sq), Estimate.from_samples(dg)


# ---------------------------------------------------------------- distance


def _ms_exact_steps(g1, g2, I_max, R_max, max_k) -> Estimate:
    value = Fraction(0)
    for i, F in enumerate(pattern_list(I_max, max_k), start=1):
        value += Fraction(1, 2**i) * abs(hom_density(F, g1) - hom_density(F, g2))
    remainder = Fraction(1, 2**I_max)
    for law in (step_pair_law, step_loop_law):
        s1 = s2 = Fraction(0)
        for r in range(R_max + 1):
            a, b = law(g1, r), law(g2, r)
            value += abs(a - b)
            s1 += a
            s2 += b
        remainder += (1 - s1) + (1 - s2)
    return Estimate.exact(value, truncation_bound=float(remainder))


def ms_distance_graphons(h1: Multigraphon, h2: Multigraphon, I_max: int = 64,
                         R_max: int | None = None, N: int = DEFAULT_N, rng=None,
                         max_k: int = 3) -> Estimate:
    """Truncated multigraphon distance.

    Exact when both arguments are step multigraphons.  Otherwise every
    density difference is estimated from one shared set of uniforms, so
    ``h`` against itself gives exactly zero.  ``truncation_bound`` holds
    ``2^-I_max`` plus estimated tails of the two multiplicity sums.
    """
    if R_max is None:
        bounds = [h.support_bound for h in (h1, h2)]
        R_max = max(bounds) + 1 if None not in bounds else DEFAULT_R_MAX
    if isinstance(h1, StepMultigraphon) and isinstance(h2, StepMultigraphon):
        return _ms_exact_steps(h1.graph, h2.graph, I_max, R_max, max_k)
    if rng is None:
        raise ValueError("rng required for Monte Carlo distance")
    U = rng.random((max_k, N))
    value = 0.0
    se = 0.0
    for i, F in enumerate(pattern_list(I_max, max_k), start=1):
        d = _hom_factor(h1, F, U) - _hom_factor(h2, F, U)
        w = 2.0**-i
        value += w * abs(d.mean())
        se += w * d.std(ddof=1) / math.sqrt(N)
    x, y = U[0], U[1]
    tails = 2.0**-I_max
    for xs, ys, step in ((x, y, 1), (x, x, 2)):
        for r in range(R_max + 1):
            d = h1.eval(step * r, xs, ys) - h2.eval(step * r, xs, ys)
            value += abs(d.mean())
            se += d.std(ddof=1) / math.sqrt(N)
        tails += float(h1.tail(step * (R_max + 1), xs, ys).mean() + h2.tail(step * (R_max + 1), xs, ys).mean())
    return Estimate(value, se, N, tails)
