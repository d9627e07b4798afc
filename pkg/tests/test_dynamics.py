from fractions import Fraction as Fr

import numpy as np
import pytest
from scipy.stats import chi2

from mgdyn.dynamics import (Observable, ReconnectParams, advance, chain_codes, conditional_cm_check, init_state,
                            length_paths, reflection_base, run_and_observe, step_index, step_one_pairs,
                            y_paths_fast)
from mgdyn.multigraph import K2, Multigraph
from mgdyn.oracle import enumerate_graphs_by_edges
from mgdyn.stats import chi_square_gof


def params(**kw):
    base = dict(n=10, theta=1.0, p1=0.3, p2=0.3, a=0.2, rho0=0.5)
    base.update(kw)
    return ReconnectParams(**base)


def test_params_validation():
    for bad in (dict(n=0), dict(theta=0.0), dict(p1=0.7, p2=0.5), dict(p1=-0.1), dict(a=0.0),
                dict(rho0=0.1)):
        with pytest.raises(ValueError):
            params(**bad)


def test_derived_quantities():
    p = params(n=2, a=0.25, rho0=0.5)
    assert p.L0 == 2
    assert p.l_thresh == 2
    assert params(n=3, a=0.25).l_thresh == 3
    # a n^2 + 1 lands on an integer: still that integer
    assert params(n=10, a=0.2).l_thresh == 21
    assert reflection_base(params(n=10, a=0.2)) == 20


def test_step_index():
    assert step_index(10, 0.5, 1.0) == 20_000
    assert step_index(10, Fr(1, 3), 0.25) == 7500
    assert step_index(3, 0.3, 0.0) == 0
    prev = -1
    for s in np.linspace(0, 2, 50):
        m = step_index(7, 0.3, float(s))
        assert m >= prev
        prev = m
    with pytest.raises(ValueError):
        step_index(10, 0.0, 1.0)
    with pytest.raises(ValueError):
        step_index(10, 0.5, -1.0)
    with pytest.raises(OverflowError):
        step_index(100_000, 1e-9, 1.0)


def test_init_state_is_growth_graph(rng):
    p = params(n=8)
    st = init_state(p, rng)
    assert st.L == p.L0 and st.m == 0
    st.graph.check_invariants()


def test_pure_growth_adds_every_step(rng):
    p = params(p1=1.0, p2=0.0)
    st = init_state(p, rng)
    advance(st, p, 37, rng)
    assert st.L == p.L0 + 74 and st.m == 37
    st.graph.check_invariants()


def test_no_add_no_delete_keeps_length(rng):
    p = params(p1=0.0, p2=0.0)
    st = init_state(p, rng)
    advance(st, p, 5000, rng)
    assert st.L == p.L0
    st.graph.check_invariants()


def test_length_parity_and_floor(rng):
    p = params(n=6, a=0.3, rho0=0.3, p1=0.2, p2=0.45)
    st = init_state(p, rng)
    for _ in range(200):
        advance(st, p, 25, rng)
        assert st.L % 2 == 0
        # deletions only happen strictly above the threshold
        assert st.L >= min(p.L0, p.l_thresh - 1)
    st.graph.check_invariants()


def test_run_and_observe_time_zero(rng):
    p = params()
    obs = [Observable("K2_0", K2(0), diagonal=False), Observable("K2_1", K2(1), diagonal=False)]
    tr = run_and_observe(p, [0.0], obs, 100, rng)
    assert tr.steps.tolist() == [0]
    assert tr.y[0] == p.L0 / p.n**2
    assert sum(e[0].value for e in tr.densities.values()) <= 1
    rows = list(tr.rows())
    assert len(rows) == 2 and rows[0][:3] == (0.0, 0, 0.5)
    with pytest.raises(ValueError):
        run_and_observe(params(p1=0.0), [0.5], obs, 100, rng)
    with pytest.raises(ValueError):
        run_and_observe(p, [0.5, 0.1], obs, 100, rng)


def test_run_and_observe_deterministic():
    p = params()
    obs = [Observable("K2_1", K2(1), diagonal=False)]
    a = run_and_observe(p, [0.001, 0.002], obs, 100, np.random.default_rng(9))
    b = run_and_observe(p, [0.001, 0.002], obs, 100, np.random.default_rng(9))
    assert list(a.rows()) == list(b.rows())


def test_step_one_pair_law(rng):
    g = Multigraph(4, [(0, 1), (0, 0), (2, 3), (1, 1)])
    st_ = init_state(params(n=4, rho0=0.25), rng)
    st_.graph = g
    th = 0.7
    p = params(n=4, theta=th, rho0=0.25)
    pairs = step_one_pairs(st_, p, 400_000, rng)
    d = g.degrees.astype(float)
    L, n = float(g.L), 4
    probs = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            probs[i, j] = (d[i] + th) / (L + n * th) * (d[j] + th + (i == j)) / (L + 1 + n * th)
    counts = np.zeros((n, n))
    np.add.at(counts, (pairs[:, 0], pairs[:, 1]), 1)
    stat, dof = chi_square_gof(counts.ravel(), probs.ravel())
    assert stat < chi2.isf(1e-4, dof)


def test_fast_y_matches_direct_walk(rng):
    p = params()
    times = [0.001, 0.004]
    steps = [step_index(p.n, p.p1, s) for s in times]
    fast = np.rint(y_paths_fast(p, times, 40_000, rng) * p.n**2)
    slow = length_paths(p, steps, 40_000, rng)
    for j in range(2):
        se = np.hypot(fast[:, j].std(), slow[:, j].std()) / np.sqrt(40_000)
        assert abs(fast[:, j].mean() - slow[:, j].mean()) < 5 * se
        assert fast[:, j].var() == pytest.approx(slow[:, j].var(), rel=0.05)
    assert np.all(fast % 2 == 0)


def test_fast_y_falls_back_when_asymmetric(rng):
    p = params(p1=0.4, p2=0.2)
    y = y_paths_fast(p, [0.0, 0.001], 50, rng)
    assert np.all(y[:, 0] == p.L0 / p.n**2)
    assert y[:, 1].mean() > y[:, 0].mean()


def test_chain_codes_shapes(rng):
    p = params(n=3, a=0.25, rho0=0.5, theta=2.0)
    codes, lengths = chain_codes(p, 4, 100, rng)
    assert codes.shape == (100, 5, 6) and lengths.shape == (100, 5)
    assert np.all(lengths[:, 0] == p.L0)


def test_initial_graph_law(rng):
    from mgdyn.generators import growth_graph_prob
    from mgdyn.oracle import tv_distance
    from mgdyn.stats import empirical_law
    p = params(n=3, theta=1.0, a=0.25, rho0=0.5)
    codes, _ = chain_codes(p, 0, 1_000_000, rng)
    exact = {c: float(growth_graph_prob(Multigraph.from_code(3, c), 1.0))
             for c in enumerate_graphs_by_edges(3, p.L0 // 2)}
    assert tv_distance(empirical_law(codes[:, 0]), exact) < 0.005


def test_conditional_cm_two_vertices(rng):
    p = params(n=2, theta=1.0, p1=0.5, p2=0.5, a=0.25, rho0=0.5)
    report = conditional_cm_check(p, 3, 1_000_000, rng)
    assert all(r["tv"] < 0.02 for r in report.values()), report


def test_conditional_cm_small_chain_literal(rng):
    p = params(n=3, theta=2.0, a=0.25, rho0=0.5)
    report = conditional_cm_check(p, 2, 1_000_000, rng)
    assert all(r["tv"] < 0.02 for r in report.values()), report


def test_conditional_cm_small_chain(rng):
    p = params(n=3, theta=2.0, a=0.25, rho0=0.5)
    report = conditional_cm_check(p, 2, 200_000, rng)
    assert set(report) <= {2, 4, 6, 8}
    for ell, r in report.items():
        # expected sampling TV is at most sqrt(K / N) / 2 over K states
        K = len(enumerate_graphs_by_edges(3, ell // 2))
        assert r["tv"] < 1.5 * 0.5 * np.sqrt(K / r["count"]), (ell, r)
