"""Replicated experiments behind the CLI: static limits, chain dynamics and fast Y paths.

Every replicate draws from its own seed stream ``(seed, experiment, ..., replicate)``
so results are identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field, asdict

import numpy as np

from .dynamics import Observable, ReconnectParams, observe, run_and_observe, step_index, y_paths_fast
from .estimate import Estimate
from .generators import GrowthParams, cm_adjacency, grow, regular_degrees
from .limit import (DEFAULT_DIFFUSION, degenerate_ind_density, expected_ind_density_at_time, folded_normal_mean,
                    psi_expectation, y_cdf)
from .multigraph import DEFAULT_BUDGET, K2, Multigraph, Pattern, loop_pattern
from .parallel import rng_for, run_tasks
from .stats import ks_critical, ks_statistic

MODELS = ("regular", "growth")


def fmt(v) -> str:
    """CSV cell: 17 significant digits for floats, blank for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.17g}"
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- patterns


_K2 = re.compile(r"^K2_(\d+)$")
_LOOP = re.compile(r"^L_(\d+)$")


def parse_observable(spec: str) -> Observable:
    """``K2_r`` (pair multiplicity, loops ignored), ``L_r`` (r loops) or ``ind|inj|hom:row;row``."""
    spec = spec.strip()
    if m := _K2.match(spec):
        return Observable(spec, K2(int(m.group(1))), "ind", diagonal=False)
    if m := _LOOP.match(spec):
        return Observable(spec, loop_pattern(int(m.group(1))), "ind", diagonal=True)
    kind, sep, body = spec.partition(":")
    if sep and kind in ("ind", "inj", "hom"):
        try:
            rows = [[int(v) for v in r.split()] for r in body.split(";")]
            return Observable(spec, Pattern(rows), kind, diagonal=True)
        except ValueError as e:
            raise ValueError(f"bad pattern {spec!r}: {e}") from None
    raise ValueError(f"unknown pattern {spec!r}")


# ---------------------------------------------------------------- static limit


@dataclass
class StaticConfig:
    model: str = "regular"
    c: float = 0.5
    theta: float = 1.0
    rho: float = 0.4
    n: list = field(default_factory=lambda: [100, 200, 400])
    patterns: list = field(default_factory=lambda: ["K2_0", "K2_1", "K2_2", "L_1"])
    replicates: int = 1000
    n_inj: int = 20000
    limit_samples: int = 1_000_000
    tolerance: float = 0.02

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if any(int(v) < 1 for v in self.n):
            raise ValueError("vertex counts must be positive")
        if self.replicates < 2:
            raise ValueError("need at least two replicates")
        for p in self.patterns:
            parse_observable(p)


def static_graph(cfg: StaticConfig, n: int, rng) -> Multigraph:
    if cfg.model == "regular":
        return Multigraph.from_adjacency(cm_adjacency(regular_degrees(n, cfg.c), rng))
    # the growth graph is a configuration-model draw given its degrees
    return grow(GrowthParams(n, cfg.theta, math.floor(cfg.rho * n * n)), rng)


def _static_task(args):
    cfg, n, rep, seed, budget = args
    rng = rng_for(seed, "static", cfg.model, n, rep)
    g_rng, obs_rng = rng.spawn(2)
    g = static_graph(cfg, n, g_rng)
    return [observe(g, parse_observable(p), cfg.n_inj, obs_rng, budget).value for p in cfg.patterns]


def static_limit_value(cfg: StaticConfig, obs: Observable, seed: int) -> Estimate:
    if cfg.model == "regular":
        return Estimate.exact(degenerate_ind_density(obs.pattern, cfg.c, obs.diagonal))
    if obs.kind != "ind":
        raise ValueError("the growth limit is only tabulated for induced densities")
    rng = rng_for(seed, "static-limit", obs.name)
    return psi_expectation(obs.pattern, 2 * cfg.rho, cfg.theta, cfg.limit_samples, rng, obs.diagonal)


STATIC_HEADER = ("model", "n", "pattern", "empirical", "stderr", "limit", "limit_stderr", "gap",
                 "combined_stderr", "seed", "replicates")
STATIC_REP_HEADER = ("seed", "replicate", "model", "n", "pattern", "value")


def run_static(cfg: StaticConfig, seed: int, workers: int = 1, budget: int = DEFAULT_BUDGET):
    """Returns ``(summary_rows, replicate_rows, report)``."""
    ns = [int(v) for v in cfg.n]
    tasks = [(cfg, n, r, seed, budget) for n in ns for r in range(cfg.replicates)]
    vals = run_tasks(_static_task, tasks, workers)
    obs = [parse_observable(p) for p in cfg.patterns]
    limits = {o.name: static_limit_value(cfg, o, seed) for o in obs}
    rep_rows = []
    summary = []
    checks = []
    by_n = {}
    for (_, n, r, _, _), v in zip(tasks, vals):
        by_n.setdefault(n, []).append(v)
        for o, x in zip(obs, v):
            rep_rows.append((seed, r, cfg.model, n, o.name, x))
    rep_rows.sort(key=lambda row: (row[1], row[3]))
    gaps = {o.name: [] for o in obs}
    for n in ns:
        arr = np.asarray(by_n[n], dtype=float)
        for j, o in enumerate(obs):
            e = Estimate.from_samples(arr[:, j])
            lim = limits[o.name]
            gap = abs(e.value - lim.value)
            comb = math.hypot(e.stderr, lim.stderr)
            gaps[o.name].append(gap)
            summary.append((cfg.model, n, o.name, e.value, e.stderr, lim.value, lim.stderr, gap, comb,
                            seed, cfg.replicates))
            if n == max(ns):
                checks.append({"name": f"gap[{o.name}, n={n}]", "observed": gap,
                               "tolerance": cfg.tolerance + 3 * comb,
                               "passed": gap < cfg.tolerance + 3 * comb})
    monotone = {k: all(b < a for a, b in zip(v, v[1:])) for k, v in gaps.items()}
    report = {"experiment": "static-limit", "seed": seed, "config": asdict(cfg), "checks": checks,
              "gap_decreasing": monotone, "passed": all(c["passed"] for c in checks)}
    return summary, rep_rows, report


# ---------------------------------------------------------------- dynamics


@dataclass
class ChainConfig:
    n: int = 40
    theta: float = 1.0
    p1: float = 0.3
    p2: float = 0.3
    a: float = 0.2
    rho0: float = 0.5

    def params(self) -> ReconnectParams:
        return ReconnectParams(self.n, self.theta, self.p1, self.p2, self.a, self.rho0)


@dataclass
class DynamicsConfig(ChainConfig):
    times: list = field(default_factory=lambda: [0.25, 1.0])
    patterns: list = field(default_factory=lambda: ["K2_0", "K2_1"])
    replicates: int = 200
    n_inj: int = 20000
    limit_outer: int = 4000
    limit_inner: int = 256
    diffusion: float = DEFAULT_DIFFUSION
    tolerance: float = 0.05
    alpha: float = 0.01

    def __post_init__(self):
        self.params()
        if sorted(self.times) != list(self.times) or any(t < 0 for t in self.times):
            raise ValueError("times must be sorted and non-negative")
        if self.replicates < 2:
            raise ValueError("need at least two replicates")
        for p in self.patterns:
            parse_observable(p)


class RegimeError(ValueError):
    pass


def check_regime(cfg: ChainConfig, unsafe: bool) -> None:
    if cfg.p1 <= 0:
        raise RegimeError("p1 must be positive")
    if cfg.p1 != cfg.p2 and not unsafe:
        raise RegimeError("p1 != p2 has no calibrated limit; pass --unsafe-regime to run anyway")


def _dyn_task(args):
    cfg, rep, seed, budget = args
    obs = [parse_observable(p) for p in cfg.patterns]
    rng = rng_for(seed, "dynamics", rep)
    tr = run_and_observe(cfg.params(), cfg.times, obs, cfg.n_inj, rng, exact_budget=budget)
    vals = [[tr.densities[o.name][t].value for o in obs] for t in range(len(cfg.times))]
    return tr.steps.tolist(), tr.y.tolist(), vals


def _limit_task(args):
    cfg, ti, name, seed = args
    o = parse_observable(name)
    s = cfg.times[ti]
    rng = rng_for(seed, "dynamics-limit", ti, name)
    return expected_ind_density_at_time(o.pattern, s, cfg.params().limit_params(), cfg.limit_outer,
                                        cfg.limit_inner, rng, o.diagonal, cfg.diffusion)


DYN_HEADER = ("seed", "replicate", "time", "step", "y", "pattern", "value")
DYN_SUMMARY_HEADER = ("time", "step", "pattern", "empirical", "stderr", "limit", "limit_stderr", "gap",
                      "combined_stderr", "y_mean", "y_stderr", "y_limit_mean", "y_ks", "y_ks_critical",
                      "seed", "replicates")


def run_dynamics(cfg: DynamicsConfig, seed: int, workers: int = 1, budget: int = DEFAULT_BUDGET,
                 unsafe: bool = False):
    """Returns ``(trajectory_rows, summary_rows, report)``."""
    check_regime(cfg, unsafe)
    calibrated = cfg.p1 == cfg.p2
    params = cfg.params()
    tasks = [(cfg, r, seed, budget) for r in range(cfg.replicates)]
    per_rep = run_tasks(_dyn_task, tasks, workers)
    rows = []
    for r, (steps, ys, vals) in enumerate(per_rep):
        for ti, s in enumerate(cfg.times):
            for pj, p in enumerate(cfg.patterns):
                rows.append((seed, r, float(s), steps[ti], ys[ti], p, vals[ti][pj]))
    rows.sort(key=lambda row: (row[1], row[2]))
    limits = {}
    if calibrated:
        ltasks = [(cfg, ti, p, seed) for ti in range(len(cfg.times)) for p in cfg.patterns]
        for (_, ti, p, _), est in zip(ltasks, run_tasks(_limit_task, ltasks, workers)):
            limits[ti, p] = est
    summary = []
    checks = []
    lp = params.limit_params()
    for ti, s in enumerate(cfg.times):
        m = step_index(params.n, params.p1, s)
        ys = np.array([res[1][ti] for res in per_rep])
        ye = Estimate.from_samples(ys)
        y_lim = ks = crit = None
        if calibrated:
            sigma = cfg.diffusion * math.sqrt(s)
            y_lim = params.a + folded_normal_mean(params.rho0 - params.a, sigma)
            if s > 0:
                ks = ks_statistic(ys, lambda x: y_cdf(x, lp, s, cfg.diffusion))
                crit = ks_critical(ys.size, cfg.alpha)
        for pj, p in enumerate(cfg.patterns):
            vals = np.array([res[2][ti][pj] for res in per_rep])
            e = Estimate.from_samples(vals)
            lim = limits.get((ti, p))
            gap = comb = None
            if lim is not None:
                gap = abs(e.value - lim.value)
                comb = math.hypot(e.stderr, lim.stderr)
                checks.append({"name": f"gap[{p}, s={s!r}]", "observed": gap,
                               "tolerance": cfg.tolerance + 3 * comb,
                               "passed": gap < cfg.tolerance + 3 * comb})
            summary.append((s, m, p, e.value, e.stderr, None if lim is None else lim.value,
                            None if lim is None else lim.stderr, gap, comb, ye.value, ye.stderr, y_lim, ks,
                            crit, seed, cfg.replicates))
    report = {"experiment": "dynamics", "seed": seed, "config": asdict(cfg), "calibrated": calibrated,
              "checks": checks, "passed": all(c["passed"] for c in checks)}
    return rows, summary, report


# ---------------------------------------------------------------- fast Y paths


@dataclass
class PathsConfig(ChainConfig):
    n: int = 20
    times: list = field(default_factory=lambda: [1.0])
    replicates: int = 2000
    chunk: int = 500
    diffusion: float = DEFAULT_DIFFUSION
    alpha: float = 0.01

    def __post_init__(self):
        self.params()
        if sorted(self.times) != list(self.times) or any(t < 0 for t in self.times):
            raise ValueError("times must be sorted and non-negative")
        if self.replicates < 1 or self.chunk < 1:
            raise ValueError("replicates and chunk must be positive")


def _paths_task(args):
    cfg, idx, size, seed = args
    return y_paths_fast(cfg.params(), cfg.times, size, rng_for(seed, "paths", idx))


PATHS_HEADER = ("seed", "replicate", "time", "step", "y")


def run_paths(cfg: PathsConfig, seed: int, workers: int = 1, unsafe: bool = False):
    """Returns ``(rows, report)``; the report holds a KS check per positive time."""
    check_regime(cfg, unsafe)
    params = cfg.params()
    R = cfg.replicates
    tasks = [(cfg, i, min(cfg.chunk, R - lo), seed) for i, lo in enumerate(range(0, R, cfg.chunk))]
    y = np.vstack(run_tasks(_paths_task, tasks, workers)) if tasks else np.empty((0, len(cfg.times)))
    steps = [step_index(params.n, params.p1, s) for s in cfg.times]
    rows = [(seed, r, s, steps[j], y[r, j]) for r in range(R) for j, s in enumerate(cfg.times)]
    checks = []
    if cfg.p1 == cfg.p2:
        lp = params.limit_params()
        for j, s in enumerate(cfg.times):
            if s <= 0:
                continue
            ks = ks_statistic(y[:, j], lambda x: y_cdf(x, lp, s, cfg.diffusion))
            crit = ks_critical(R, cfg.alpha)
            checks.append({"name": f"y_ks[s={s!r}]", "observed": ks, "tolerance": crit, "passed": ks < crit,
                           "mean": float(y[:, j].mean()), "var": float(y[:, j].var(ddof=1))})
    report = {"experiment": "paths", "seed": seed, "config": asdict(cfg), "checks": checks,
              "passed": all(c["passed"] for c in checks)}
    return rows, report
