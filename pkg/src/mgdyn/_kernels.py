"""Compiled inner loops shared by the growth sampler and the reconnection chain.

State layout: ``adj`` is the dense adjacency (diagonal holds twice the loop
count), ``deg`` the degree vector and ``ends`` the half-edge owner array.
Edge ``e`` occupies slots ``2e`` and ``2e + 1``, so the partner of half-edge
``h`` is ``h ^ 1``.  Randomness comes in as pre-drawn uniforms so that every
run is reproducible from a numpy ``Generator``.
"""

import numpy as np
from numba import njit

UNIFORMS_PER_STEP = 5

ACT_ADD = 0
ACT_DELETE = 1
ACT_RECONNECT = 2


@njit(cache=True)
def _index(u, k):
    i = int(u * k)
    if i >= k:
        i = k - 1
    return i


@njit(cache=True)
def pa_vertex(ends, L, n, theta, u_mix, u_idx, extra):
    # vertex chosen w.p. (d_v + theta + [v == extra]) / (L + [extra >= 0] + n theta)
    tot = L + (1 if extra >= 0 else 0)
    if u_mix * (tot + n * theta) < tot:
        k = _index(u_idx, tot)
        if k == L:
            return extra
        return ends[k]
    return _index(u_idx, n)


@njit(cache=True)
def link(adj, i, j, sign):
    if i == j:
        adj[i, i] += 2 * sign
    else:
        adj[i, j] += sign
        adj[j, i] += sign


@njit(cache=True)
def add_edge(adj, deg, ends, L, i, j):
    ends[L] = i
    ends[L + 1] = j
    link(adj, i, j, 1)
    deg[i] += 1
    deg[j] += 1
    return L + 2


@njit(cache=True)
def delete_edge(adj, deg, ends, L, e):
    v = ends[2 * e]
    w = ends[2 * e + 1]
    link(adj, v, w, -1)
    deg[v] -= 1
    deg[w] -= 1
    ends[2 * e] = ends[L - 2]
    ends[2 * e + 1] = ends[L - 1]
    return L - 2


@njit(cache=True)
def add_step(adj, deg, ends, L, n, theta, u1, u2, u3, u4):
    i = pa_vertex(ends, L, n, theta, u1, u2, -1)
    j = pa_vertex(ends, L, n, theta, u3, u4, i)
    return add_edge(adj, deg, ends, L, i, j)


@njit(cache=True)
def reconnect_step(adj, deg, ends, L, n, theta, u1, u2, u3):
    if L == 0:
        return L
    h = _index(u1, L)
    hp = h ^ 1
    w = ends[h]
    v = ends[hp]
    # target drawn with the degrees before detachment
    i = pa_vertex(ends, L, n, theta, u2, u3, -1)
    if i == v:
        return L
    link(adj, w, v, -1)
    link(adj, w, i, 1)
    ends[hp] = i
    deg[v] -= 1
    deg[i] += 1
    return L


@njit(cache=True)
def choose_action(L, l_thresh, p1, p2, u0):
    if L > l_thresh:
        if u0 < p1:
            return ACT_ADD
        if u0 < p1 + p2:
            return ACT_DELETE
        return ACT_RECONNECT
    if u0 < p1 + p2:
        return ACT_ADD
    return ACT_RECONNECT


@njit(cache=True)
def chain_block(adj, deg, ends, L, n, theta, p1, p2, l_thresh, u):
    """Run ``u.shape[0]`` chain steps in place and return the new half-edge count."""
    for t in range(u.shape[0]):
        act = choose_action(L, l_thresh, p1, p2, u[t, 0])
        if act == ACT_ADD:
            L = add_step(adj, deg, ends, L, n, theta, u[t, 1], u[t, 2], u[t, 3], u[t, 4])
        elif act == ACT_DELETE:
            L = delete_edge(adj, deg, ends, L, _index(u[t, 1], L // 2))
        else:
            L = reconnect_step(adj, deg, ends, L, n, theta, u[t, 1], u[t, 2], u[t, 3])
    return L


@njit(cache=True)
def grow_block(adj, deg, ends, L, n, theta, u):
    for t in range(u.shape[0]):
        L = add_step(adj, deg, ends, L, n, theta, u[t, 0], u[t, 1], u[t, 2], u[t, 3])
    return L


@njit(cache=True)
def upper_code(adj, n, out):
    k = 0
    for i in range(n):
        for j in range(i, n):
            out[k] = adj[i, j]
            k += 1


@njit(cache=True)
def grow_many(n, theta, m, u, out):
    """Independent growth runs; ``u`` has shape (size, m, 4), ``out`` (size, n(n+1)/2)."""
    adj = np.zeros((n, n), dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    ends = np.zeros(2 * m + 2, dtype=np.int64)
    for s in range(u.shape[0]):
        adj[:, :] = 0
        deg[:] = 0
        L = grow_block(adj, deg, ends, 0, n, theta, u[s])
        upper_code(adj, n, out[s])


@njit(cache=True)
def chain_many(n, theta, p1, p2, l_thresh, init_u, u, codes, lengths):
    """Independent short chains from a fresh growth start.

    ``init_u`` has shape (size, m0, 4) and ``u`` shape (size, steps, 5).
    The state after each step ``t = 0..steps`` is written to ``codes[s, t]``
    and ``lengths[s, t]``.
    """
    m0 = init_u.shape[1]
    steps = u.shape[1]
    cap = 2 * (m0 + steps) + 2
    adj = np.zeros((n, n), dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    ends = np.zeros(cap, dtype=np.int64)
    for s in range(u.shape[0]):
        adj[:, :] = 0
        deg[:] = 0
        L = grow_block(adj, deg, ends, 0, n, theta, init_u[s])
        upper_code(adj, n, codes[s, 0])
        lengths[s, 0] = L
        for t in range(steps):
            L = chain_block(adj, deg, ends, L, n, theta, p1, p2, l_thresh, u[s, t:t + 1])
            upper_code(adj, n, codes[s, t + 1])
            lengths[s, t + 1] = L


@njit(cache=True)
def length_walk(L0, l_thresh, p1, p2, steps, u, out_at, out):
    """Half-edge count alone, for checking the reflected-walk identity."""
    L = L0
    j = 0
    for t in range(steps + 1):
        while j < out_at.shape[0] and out_at[j] == t:
            out[j] = L
            j += 1
        if t == steps:
            break
        u0 = u[t]
        if L > l_thresh:
            if u0 < p1:
                L += 2
            elif u0 < p1 + p2:
                L -= 2
        elif u0 < p1 + p2:
            L += 2
    return L


@njit(cache=True)
def add_pairs_many(ends, L, n, theta, u, out):
    """Endpoints Step I would pick on a frozen state, one row of ``u`` per draw."""
    for s in range(u.shape[0]):
        i = pa_vertex(ends, L, n, theta, u[s, 0], u[s, 1], -1)
        j = pa_vertex(ends, L, n, theta, u[s, 2], u[s, 3], i)
        out[s, 0] = i
        out[s, 1] = j
