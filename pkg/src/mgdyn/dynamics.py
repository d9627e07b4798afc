"""Edge-reconnection chain: add, delete or move one edge end per step.

While the half-edge count ``L`` exceeds ``a n^2 + 1`` the chain adds an
edge with probability ``p1``, deletes a uniform edge with probability
``p2`` and otherwise moves one end of a uniform edge to a vertex chosen
with weight ``deg + theta``.  At or below the threshold deletions are
replaced by additions.  With ``p1 = p2`` the rescaled count ``L / n^2``
behaves like a Brownian motion reflected at ``a`` on the time scale
``m = n^4 s / p1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .estimate import Estimate
from .generators import GrowthParams, grow
from .limit import LimitParams
from .multigraph import Multigraph, Pattern, ind_density, inj_density, hom_density, sampled_density

INT64_MAX = 2**63 - 1
DEFAULT_BLOCK = 1 << 16


def _exact(x) -> Fraction:
    return Fraction(str(x)) if not isinstance(x, (int, Fraction)) else Fraction(x)


@dataclass(frozen=True)
class ReconnectParams:
    n: int
    theta: float
    p1: float
    p2: float
    a: float
    rho0: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not (0 <= self.p1 <= 1 and 0 <= self.p2 <= 1 and self.p1 + self.p2 <= 1 + 1e-15):
            raise ValueError("need p1, p2 in [0, 1] with p1 + p2 <= 1")
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not self.rho0 >= self.a:
            raise ValueError("rho0 must be at least a")

    @property
    def l_thresh(self) -> int:
        """Largest integer ``<= a n^2 + 1``; deletions need ``L`` strictly above it."""
        return math.floor(_exact(self.a) * self.n**2 + 1)

    @property
    def L0(self) -> int:
        return 2 * math.floor(_exact(self.rho0) * self.n**2 / 2)

    def limit_params(self) -> LimitParams:
        return LimitParams(self.theta, self.a, self.rho0)


def step_index(n: int, p1: float, s: float) -> int:
    """``floor(n^4 s / p1)`` in exact arithmetic."""
    if p1 == 0:
        raise ValueError("p1 = 0 leaves the time scale undefined")
    if s < 0:
        raise ValueError("negative time")
    m = math.floor(Fraction(n) ** 4 * _exact(s) / _exact(p1))
    if m > INT64_MAX:
        raise OverflowError("step index exceeds 64-bit range")
    return m


@dataclass
class ReconnectState:
    graph: Multigraph
    m: int = 0

    @property
    def L(self) -> int:
        return self.graph.L

    @property
    def half_edge_owner(self) -> np.ndarray:
        return self.graph._ends[: self.graph.L]

    def y(self) -> float:
        return self.graph.L / self.graph.n**2


def init_state(params: ReconnectParams, rng) -> ReconnectState:
    """Growth-model graph with ``L0 / 2`` edges."""
    g = grow(GrowthParams(params.n, params.theta, params.L0 // 2), rng)
    return ReconnectState(g, 0)


def advance(state: ReconnectState, params: ReconnectParams, steps: int, rng,
            block: int = DEFAULT_BLOCK) -> None:
    """Run ``steps`` chain steps in place."""
    g = state.graph
    if g.n != params.n:
        raise ValueError("state and params disagree on n")
    left = int(steps)
    while left > 0:
        b = min(block, left)
        g._reserve(g.L + 2 * b)
        u = rng.random((b, K.UNIFORMS_PER_STEP))
        g._L = int(K.chain_block(g._adj, g._deg, g._ends, g.L, params.n, float(params.theta),
                                 float(params.p1), float(params.p2), params.l_thresh, u))
        left -= b
    state.m += int(steps)


def step(state: ReconnectState, params: ReconnectParams, rng) -> None:
    advance(state, params, 1, rng)


# ---------------------------------------------------------------- observation


@dataclass(frozen=True)
class Observable:
    """A density to record: ``kind`` is ``ind``, ``inj`` or ``hom``."""

    name: str
    pattern: Pattern
    kind: str = "ind"
    diagonal: bool = True


def observe(g: Multigraph, obs: Observable, n_inj: int, rng, exact_budget: int = 1_000_000) -> Estimate:
    """Exact density when the map count is within budget, otherwise ``n_inj`` sampled maps."""
    maps = g.n ** obs.pattern.k
    if maps <= exact_budget or obs.pattern.k <= 2:
        fn = {"ind": ind_density, "inj": inj_density, "hom": hom_density}[obs.kind]
        kw = {"diagonal": obs.diagonal} if obs.kind == "ind" else {}
        val = fn(obs.pattern, g, budget=max(exact_budget, maps), **kw)
        return Estimate.exact(val, n_samples=0)
    return sampled_density(obs.pattern, g, obs.kind, n_inj, rng, diagonal=obs.diagonal)


@dataclass
class Trajectory:
    times: np.ndarray
    steps: np.ndarray
    y: np.ndarray
    densities: dict = field(default_factory=dict)

    def rows(self):
        """``(time, step, Y, name, value, stderr)`` per time and observable, time-major."""
        for t in range(self.times.size):
            for name, ests in self.densities.items():
                e = ests[t]
                yield (float(self.times[t]), int(self.steps[t]), float(self.y[t]), name, e.value, e.stderr)


def run_and_observe(params: ReconnectParams, times, observables, n_inj: int, rng,
                    state: ReconnectState | None = None, exact_budget: int = 1_000_000) -> Trajectory:
    """Advance one chain through ``times`` (rescaled) and record densities at each."""
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(np.diff(times) < 0) or np.any(times < 0)):
        raise ValueError("times must be sorted and non-negative")
    if times.size and params.p1 == 0:
        raise ValueError("p1 = 0 leaves the time scale undefined")
    chain_rng, obs_rng = rng.spawn(2)
    if state is None:
        state = init_state(params, chain_rng)
    steps = np.array([step_index(params.n, params.p1, s) for s in times], dtype=np.int64)
    y = np.empty(times.size)
    dens = {o.name: [] for o in observables}
    for t, m in enumerate(steps):
        if m < state.m:
            raise ValueError("chain already past requested time")
        advance(state, params, int(m) - state.m, chain_rng)
        y[t] = state.y()
        for o in observables:
            dens[o.name].append(observe(state.graph, o, n_inj, obs_rng, exact_budget))
    return Trajectory(times, steps, y, dens)


# ---------------------------------------------------------------- half-edge count alone


def reflection_base(params: ReconnectParams) -> int:
    """Largest even ``L`` with no deletions allowed."""
    t = params.l_thresh
    return t - (t % 2)


def y_paths_fast(params: ReconnectParams, times, size: int, rng) -> np.ndarray:
    """Rescaled half-edge counts ``L / n^2`` at ``times``; shape (size, len(times)).

    The count ignores graph structure, so it is simulated on its own.  For
    ``p1 = p2`` and ``L0`` at or above the reflection base ``b`` the count is
    ``b + 2 |X|`` for a lazy walk ``X``, whose increments between
    observation times are multinomial; otherwise the walk is stepped.
    """
    steps = np.array([step_index(params.n, params.p1, s) for s in times], dtype=np.int64)
    if np.any(np.diff(steps) < 0):
        raise ValueError("times must be sorted")
    b = reflection_base(params)
    L0 = params.L0
    n2 = params.n**2
    if params.p1 == params.p2 and L0 >= b:
        x = np.full(size, (L0 - b) // 2, dtype=np.int64)
        out = np.empty((size, steps.size))
        prev = 0
        probs = [params.p1, params.p1, max(0.0, 1 - 2 * params.p1)]
        for j, m in enumerate(steps):
            if m > prev:
                c = rng.multinomial(int(m - prev), probs, size=size)
                x += c[:, 0] - c[:, 1]
            prev = m
            out[:, j] = (b + 2 * np.abs(x)) / n2
        return out
    return length_paths(params, steps, size, rng) / n2


def length_paths(params: ReconnectParams, steps, size: int, rng) -> np.ndarray:
    """Direct simulation of the half-edge count at the given step indices."""
    steps = np.asarray(steps, dtype=np.int64)
    total = int(steps.max()) if steps.size else 0
    out = np.empty((size, steps.size), dtype=np.int64)
    row = np.empty(steps.size, dtype=np.int64)
    for s in range(size):
        u = rng.random(total)
        K.length_walk(params.L0, params.l_thresh, float(params.p1), float(params.p2), total, u, steps, row)
        out[s] = row
    return out


# ---------------------------------------------------------------- tiny-chain laws


def chain_codes(params: ReconnectParams, steps: int, size: int, rng, chunk: int = 1 << 15):
    """``size`` independent chains from a fresh start.

    Returns ``(codes, lengths)`` with shapes (size, steps+1, n(n+1)/2) and
    (size, steps+1): the state after every step.
    """
    n = params.n
    m0 = params.L0 // 2
    P = n * (n + 1) // 2
    codes = np.zeros((size, steps + 1, P), dtype=np.int64)
    lengths = np.zeros((size, steps + 1), dtype=np.int64)
    for lo in range(0, size, chunk):
        hi = min(size, lo + chunk)
        init_u = rng.random((hi - lo, m0, 4))
        u = rng.random((hi - lo, steps, K.UNIFORMS_PER_STEP))
        K.chain_many(n, float(params.theta), float(params.p1), float(params.p2), params.l_thresh,
                     init_u, u, codes[lo:hi], lengths[lo:hi])
    return codes, lengths


def step_one_pairs(state: ReconnectState, params: ReconnectParams, size: int, rng) -> np.ndarray:
    """Endpoints Step I would choose on the frozen state, shape (size, 2)."""
    out = np.empty((size, 2), dtype=np.int64)
    u = rng.random((size, 4))
    K.add_pairs_many(state.graph._ends, state.L, params.n, float(params.theta), u, out)
    return out


def conditional_cm_check(params: ReconnectParams, m: int, n_draws: int, rng, max_states: int = 100_000) -> dict:
    """Bucket ``n_draws`` chain states after ``m`` steps by ``L`` and compare with the growth law.

    Returns ``{L: {"count": int, "tv": float}}``.
    """
    from .generators import growth_graph_prob
    from .oracle import enumerate_graphs_by_edges, tv_distance

    codes, lengths = chain_codes(params, m, n_draws, rng)
    final = codes[:, m]
    L = lengths[:, m]
    report = {}
    for ell in np.unique(L):
        sel = final[L == ell]
        support = enumerate_graphs_by_edges(params.n, int(ell) // 2, cap=max_states)
        exact = {c: float(growth_graph_prob(Multigraph.from_code(params.n, c), params.theta)) for c in support}
        keys, counts = np.unique(sel, axis=0, return_counts=True)
        emp = {tuple(int(v) for v in k): c / sel.shape[0] for k, c in zip(keys, counts)}
        report[int(ell)] = {"count": int(sel.shape[0]), "tv": tv_distance(emp, exact)}
    return report
