"""Exact-law and sampler-fidelity checks run by ``mgdyn verify``.

Each check returns a list of :class:`CheckResult`.  Sampling checks split
their draws into fixed chunks with their own seeds, so the outcome does
not depend on how chunks are spread over workers.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from fractions import Fraction

import numpy as np

from . import oracle
from .dynamics import ReconnectParams, chain_codes
from .generators import (GrowthParams, cm_prob, compositions, grow_codes, growth_degree_prob,
                         growth_graph_prob, nb_conditional_degree_law, sample_cm_codes)
from .multigraph import Multigraph
from .parallel import rng_for, run_tasks

THETAS = (Fraction(1, 2), Fraction(1), Fraction(2))
CM_SAMPLER_DEGREES = ((2, 2), (3, 1, 2), (2, 2, 2))
CHAIN_PARAMS = dict(n=2, theta=1.0, p1=0.5, p2=0.5, a=0.25, rho0=0.5)


@dataclass
class CheckResult:
    name: str
    observed: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_json(self) -> dict:
        return asdict(self)


def _graph(n, code) -> Multigraph:
    return Multigraph.from_code(n, code)


def cm_degree_cases(max_n: int = 4, max_total: int = 8):
    for n in range(1, max_n + 1):
        for total in range(0, max_total + 1, 2):
            yield from compositions(total, n)


# ---------------------------------------------------------------- exact


def check_cm_exact(corrupt: bool = False) -> list[CheckResult]:
    bad = 0
    cases = 0
    sums_ok = True
    for d in cm_degree_cases():
        law = oracle.exact_cm_law(d)
        support = oracle.enumerate_graphs_by_degrees(d)
        if set(support) != set(law):
            bad += 1
        total = Fraction(0)
        for code in support:
            p = cm_prob(_graph(len(d), code), d)
            if corrupt:
                p *= Fraction(1000001, 1000000)
            total += p
            bad += p != law.get(code, 0)
            cases += 1
        sums_ok &= total == 1 and sum(law.values()) == 1
    return [CheckResult("cm_prob_exact", bad, 0, bad == 0, f"{cases} graphs"),
            CheckResult("cm_prob_sums_to_one", 0 if sums_ok else 1, 0, sums_ok)]


def _growth_cases():
    for n in (1, 2, 3):
        for m in (0, 1, 2, 3):
            for theta in THETAS:
                yield n, m, theta


def check_growth_exact() -> list[CheckResult]:
    bad_graph = bad_deg = bad_nb = bad_ratio = 0
    sums_ok = True
    cases = 0
    for n, m, theta in _growth_cases():
        dp = oracle.exact_growth_law(n, m, theta)
        support = oracle.enumerate_graphs_by_edges(n, m)
        g_total = Fraction(0)
        for code in support:
            g = _graph(n, code)
            p = growth_graph_prob(g, theta)
            g_total += p
            bad_graph += p != dp.get(code, 0)
            deg = tuple(int(x) for x in g.degrees)
            ratio = p / growth_degree_prob(deg, theta)
            bad_ratio += ratio != cm_prob(g, deg)
            cases += 1
        dlaw = oracle.exact_degree_law(n, m, theta)
        nb = nb_conditional_degree_law(n, m, theta)
        d_total = Fraction(0)
        for d in compositions(2 * m, n):
            q = growth_degree_prob(d, theta)
            d_total += q
            bad_deg += q != dlaw.get(d, 0)
            bad_nb += q != nb.get(d, 0)
        sums_ok &= g_total == 1 and d_total == 1 and sum(dp.values()) == 1 and sum(nb.values()) == 1
    return [
        CheckResult("growth_graph_prob_exact", bad_graph, 0, bad_graph == 0, f"{cases} graphs"),
        CheckResult("growth_degree_prob_exact", bad_deg, 0, bad_deg == 0),
        CheckResult("nb_conditional_law_exact", bad_nb, 0, bad_nb == 0),
        CheckResult("growth_laws_sum_to_one", 0 if sums_ok else 1, 0, sums_ok),
        CheckResult("growth_over_degree_is_cm", bad_ratio, 0, bad_ratio == 0),
    ]


def check_cm_identity() -> list[CheckResult]:
    """Growth law divided by its degree law equals the configuration-model law."""
    bad = 0
    cases = 0
    for d in cm_degree_cases(3, 6):
        if sum(d) == 0:
            continue
        for theta in THETAS:
            for code in oracle.enumerate_graphs_by_degrees(d):
                g = _graph(len(d), code)
                bad += growth_graph_prob(g, theta) / growth_degree_prob(d, theta) != cm_prob(g, d)
                cases += 1
    return [CheckResult("cm_identity", bad, 0, bad == 0, f"{cases} graphs")]


# ---------------------------------------------------------------- sampling


def _chunks(total: int, chunk: int):
    return [(i, min(chunk, total - i * chunk)) for i in range((total + chunk - 1) // chunk)]


def _cm_chunk(args):
    seed, d, idx, size = args
    codes = sample_cm_codes(d, size, rng_for(seed, "cm", *d, idx))
    keys, counts = np.unique(codes, axis=0, return_counts=True)
    return {tuple(int(v) for v in k): int(c) for k, c in zip(keys, counts)}


def _growth_chunk(args):
    seed, n, m, theta, idx, size = args
    codes = grow_codes(GrowthParams(n, float(theta), m), size, rng_for(seed, "grow", n, m, str(theta), idx))
    keys, counts = np.unique(codes, axis=0, return_counts=True)
    return {tuple(int(v) for v in k): int(c) for k, c in zip(keys, counts)}


def _merge(parts):
    out: dict = {}
    for p in parts:
        for k, v in p.items():
            out[k] = out.get(k, 0) + v
    total = sum(out.values())
    return {k: v / total for k, v in out.items()}


def check_cm_sampler(seed: int, draws: int, tol: float, workers: int = 1, chunk: int = 1 << 17) -> list[CheckResult]:
    out = []
    for d in CM_SAMPLER_DEGREES:
        tasks = [(seed, d, i, s) for i, s in _chunks(draws, chunk)]
        emp = _merge(run_tasks(_cm_chunk, tasks, workers))
        exact = {k: float(v) for k, v in oracle.exact_cm_law(d).items()}
        tv = oracle.tv_distance(emp, exact)
        out.append(CheckResult(f"sample_cm_tv{list(d)}", tv, tol, tv < tol, f"{draws} draws"))
    return out


def check_growth_sampler(seed: int, draws: int, tol: float, workers: int = 1, chunk: int = 1 << 17) -> list[CheckResult]:
    out = []
    for n, m, theta in _growth_cases():
        if m == 0:
            continue
        tasks = [(seed, n, m, theta, i, s) for i, s in _chunks(draws, chunk)]
        emp = _merge(run_tasks(_growth_chunk, tasks, workers))
        exact = {k: float(v) for k, v in oracle.exact_growth_law(n, m, theta).items()}
        tv = oracle.tv_distance(emp, exact)
        out.append(CheckResult(f"grow_tv[n={n},m={m},theta={theta}]", tv, tol, tv < tol, f"{draws} draws"))
    return out


def _chain_chunk(args):
    seed, steps, idx, size = args
    params = ReconnectParams(**CHAIN_PARAMS)
    codes, lengths = chain_codes(params, steps, size, rng_for(seed, "chain", idx))
    out = {}
    for t in range(steps + 1):
        keys, counts = np.unique(np.column_stack([lengths[:, t], codes[:, t]]), axis=0, return_counts=True)
        for k, c in zip(keys, counts):
            key = (t, int(k[0]), tuple(int(v) for v in k[1:]))
            out[key] = out.get(key, 0) + int(c)
    return out


def chain_slices(seed: int, draws: int, steps: int, workers: int = 1, chunk: int = 1 << 16):
    """Empirical counts ``{(t, L, code): count}`` of the tiny chain."""
    tasks = [(seed, steps, i, s) for i, s in _chunks(draws, chunk)]
    merged: dict = {}
    for part in run_tasks(_chain_chunk, tasks, workers):
        for k, v in part.items():
            merged[k] = merged.get(k, 0) + v
    return merged


def check_chain_conditional(seed: int, draws: int, tol: float, steps: int = 6, workers: int = 1,
                            escape_tol: float = 1e-3, uncond_tol: float = 0.01) -> list[CheckResult]:
    """Each slice ``{L = l}`` of the tiny chain against the growth law with ``l / 2`` edges."""
    p = CHAIN_PARAMS
    n = p["n"]
    counts = chain_slices(seed, draws, steps, workers)
    worst = 0.0
    worst_at = ""
    uncond = 0.0
    growth_cache: dict = {}
    exact_bad = 0
    escaped_max = Fraction(0)
    for t in range(steps + 1):
        dp, escaped = oracle.exact_reconnect_law(n, p["theta"], p["p1"], p["p2"], p["a"], p["rho0"], t,
                                                 L_cap=p_l_cap(t))
        escaped_max = max(escaped_max, escaped)
        slices: dict = {}
        for (tt, ell, code), c in counts.items():
            if tt == t:
                slices.setdefault(ell, {})[code] = c
        flat: dict = {}
        for sl in slices.values():
            for code, c in sl.items():
                flat[code] = flat.get(code, 0) + c
        uncond = max(uncond, oracle.tv_distance({k: v / draws for k, v in flat.items()},
                                                {k: float(v) for k, v in dp.items()}))
        dp_lengths = {oracle.half_edges_of(c, n) for c in dp}
        for ell in sorted(dp_lengths):
            if ell not in growth_cache:
                growth_cache[ell] = oracle.exact_growth_law(n, ell // 2, p["theta"])
            target = growth_cache[ell]
            cond = oracle.condition(dp, lambda c: oracle.half_edges_of(c, n) == ell)
            exact_bad += cond != target
        for ell, sl in slices.items():
            tot = sum(sl.values())
            emp = {k: v / tot for k, v in sl.items()}
            tv = oracle.tv_distance(emp, {k: float(v) for k, v in growth_cache.get(
                ell, oracle.exact_growth_law(n, ell // 2, p["theta"])).items()})
            if tv > worst:
                worst, worst_at = tv, f"m={t}, L={ell}, count={tot}"
    return [
        CheckResult("chain_conditional_slices_tv", worst, tol, worst < tol, worst_at),
        CheckResult("chain_unconditional_tv", uncond, uncond_tol, uncond < uncond_tol),
        CheckResult("chain_oracle_slices_exact", exact_bad, 0, exact_bad == 0),
        CheckResult("chain_oracle_escaped_mass", float(escaped_max), escape_tol, escaped_max < escape_tol),
    ]


def p_l_cap(t: int) -> int:
    """Half-edge cap large enough that nothing escapes in ``t`` steps."""
    return 2 * int(Fraction(str(CHAIN_PARAMS["rho0"])) * CHAIN_PARAMS["n"] ** 2 // 2) + 2 * t


ALL_CHECKS = ("cm_exact", "growth_exact", "cm_identity", "sampler_cm", "sampler_growth", "chain_conditional")


def run_checks(names, seed: int, workers: int, draws: int, tv_tol: float, chain_draws: int,
               chain_tol: float, chain_steps: int, uncond_tol: float = 0.01,
               corrupt: bool = False) -> list[CheckResult]:
    out: list[CheckResult] = []
    for name in names:
        if name == "cm_exact":
            out += check_cm_exact(corrupt)
        elif name == "growth_exact":
            out += check_growth_exact()
        elif name == "cm_identity":
            out += check_cm_identity()
        elif name == "sampler_cm":
            out += check_cm_sampler(seed, draws, tv_tol, workers)
        elif name == "sampler_growth":
            out += check_growth_sampler(seed, draws, tv_tol, workers)
        elif name == "chain_conditional":
            out += check_chain_conditional(seed, chain_draws, chain_tol, chain_steps, workers,
                                           uncond_tol=uncond_tol)
        else:
            raise ValueError(f"unknown check {name!r}")
    return out
