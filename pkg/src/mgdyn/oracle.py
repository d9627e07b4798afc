"""Brute-force ground truth for tiny cases.

Graphs are plain tuples here: the row-major upper triangle of the
adjacency, diagonal entries being twice the loop count.  Nothing in this
module calls the samplers or density code it is used to check.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

ExactLaw = dict


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


def upper_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


def to_matrix(n: int, code) -> list[list[int]]:
    z = [[0] * n for _ in range(n)]
    for (i, j), v in zip(upper_pairs(n), code):
        z[i][j] = z[j][i] = int(v)
    return z


def to_code(z) -> tuple:
    n = len(z)
    return tuple(int(z[i][j]) for i, j in upper_pairs(n))


def degrees_of(n: int, code) -> tuple:
    z = to_matrix(n, code)
    return tuple(sum(row) for row in z)


def half_edges_of(code, n: int) -> int:
    return sum(degrees_of(n, code))


# ---------------------------------------------------------------- enumeration


def enumerate_graphs_by_degrees(d, cap: int = 1_000_000) -> list[tuple]:
    """Every multigraph with degree sequence ``d``."""
    n = len(d)
    pairs = upper_pairs(n)
    out = []

    def rec(pos, rem, acc):
        if len(out) > cap:
            raise ValueError("state-space cap exceeded")
        if pos == len(pairs):
            if all(r == 0 for r in rem):
                out.append(tuple(acc))
            return
        i, j = pairs[pos]
        if i == j:
            for loops in range(rem[i] // 2 + 1):
                rem[i] -= 2 * loops
                acc.append(2 * loops)
                rec(pos + 1, rem, acc)
                acc.pop()
                rem[i] += 2 * loops
        else:
            for x in range(min(rem[i], rem[j]) + 1):
                rem[i] -= x
                rem[j] -= x
                acc.append(x)
                # vertex i has no entries left after its last pair
                if j < n - 1 or rem[i] == 0:
                    rec(pos + 1, rem, acc)
                acc.pop()
                rem[i] += x
                rem[j] += x

    if sum(d) % 2 == 0:
        rec(0, list(d), [])
    return out


def enumerate_graphs_by_edges(n: int, m: int, cap: int = 1_000_000) -> list[tuple]:
    """Every multigraph on ``n`` vertices with ``m`` edges plus loops."""
    pairs = upper_pairs(n)
    out = []

    def rec(pos, left, acc):
        if len(out) > cap:
            raise ValueError("state-space cap exceeded")
        if pos == len(pairs) - 1:
            i, j = pairs[pos]
            out.append(tuple(acc + [2 * left if i == j else left]))
            return
        i, j = pairs[pos]
        for u in range(left + 1):
            rec(pos + 1, left - u, acc + [2 * u if i == j else u])

    if n == 0:
        return [()] if m == 0 else []
    rec(0, m, [])
    return out


# ---------------------------------------------------------------- exact laws


def exact_cm_law(d) -> ExactLaw:
    """Configuration-model law by listing every perfect matching of labelled half-edges."""
    n = len(d)
    owner = [v for v in range(n) for _ in range(d[v])]
    if len(owner) % 2:
        raise ValueError("odd degree sum")
    counts: dict = {}
    total = 0

    def rec(free, z):
        nonlocal total
        if not free:
            key = to_code(z)
            counts[key] = counts.get(key, 0) + 1
            total += 1
            return
        a = free[0]
        for idx in range(1, len(free)):
            b = free[idx]
            v, w = owner[a], owner[b]
            if v == w:
                z[v][v] += 2
            else:
                z[v][w] += 1
                z[w][v] += 1
            rec(free[1:idx] + free[idx + 1:], z)
            if v == w:
                z[v][v] -= 2
            else:
                z[v][w] -= 1
                z[w][v] -= 1

    rec(list(range(len(owner))), [[0] * n for _ in range(n)])
    if not owner:
        return {to_code([[0] * n for _ in range(n)]): Fraction(1)}
    return {k: Fraction(c, total) for k, c in counts.items()}


def _add_moves(n, z, theta):
    """(new_code, prob) for one preferential edge addition."""
    deg = [sum(row) for row in z]
    L = sum(deg)
    den = (L + n * theta) * (L + n * theta + 1)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                p = (deg[i] + theta) * (deg[i] + theta + 1) / den
            else:
                p = 2 * (deg[i] + theta) * (deg[j] + theta) / den
            zz = [row[:] for row in z]
            if i == j:
                zz[i][i] += 2
            else:
                zz[i][j] += 1
                zz[j][i] += 1
            yield to_code(zz), p


def _push(law, key, p):
    if p:
        law[key] = law.get(key, 0) + p


def exact_growth_law(n: int, m: int, theta) -> ExactLaw:
    """Law after ``m`` preferential additions from the empty graph, by dynamic programming."""
    theta = _frac(theta)
    law = {to_code([[0] * n for _ in range(n)]): Fraction(1)}
    for _ in range(m):
        nxt: dict = {}
        for code, p in law.items():
            for new, q in _add_moves(n, to_matrix(n, code), theta):
                _push(nxt, new, p * q)
        law = nxt
    return law


def exact_degree_law(n: int, m: int, theta) -> ExactLaw:
    out: dict = {}
    for code, p in exact_growth_law(n, m, theta).items():
        _push(out, degrees_of(n, code), p)
    return out


def _reconnect_moves(n, z, theta, p1, p2, l_thresh):
    deg = [sum(row) for row in z]
    L = sum(deg)
    code = to_code(z)
    if L > l_thresh:
        pa, pd = p1, p2
    else:
        pa, pd = p1 + p2, Fraction(0)
    pm = 1 - p1 - p2
    for new, q in _add_moves(n, z, theta):
        yield new, pa * q
    if pd and L:
        for i in range(n):
            for j in range(i, n):
                c = z[i][j] // 2 if i == j else z[i][j]
                if c:
                    zz = [row[:] for row in z]
                    if i == j:
                        zz[i][i] -= 2
                    else:
                        zz[i][j] -= 1
                        zz[j][i] -= 1
                    yield to_code(zz), pd * Fraction(c, L // 2)
    if pm:
        if L == 0:
            yield code, pm
            return
        # half-edge at w whose partner sits at v; the partner moves to t
        for w in range(n):
            for v in range(n):
                if not z[w][v]:
                    continue
                pick = Fraction(z[w][v], L)
                for t in range(n):
                    q = (deg[t] + theta) / (L + n * theta)
                    zz = [row[:] for row in z]
                    for (x, y), s in (((w, v), -1), ((w, t), 1)):
                        if x == y:
                            zz[x][x] += 2 * s
                        else:
                            zz[x][y] += s
                            zz[y][x] += s
                    yield to_code(zz), pm * pick * q


def exact_reconnect_law(n: int, theta, p1, p2, a, rho0, m: int, L_cap: int | None = None):
    """Law of the chain after ``m`` steps from the growth start.

    States whose half-edge count would exceed ``L_cap`` are dropped and
    their mass returned as ``escaped``.  Returns ``(law, escaped)``.
    """
    theta, p1, p2, a, rho0 = (_frac(x) for x in (theta, p1, p2, a, rho0))
    l_thresh = math.floor(a * n * n + 1)
    L0 = 2 * math.floor(rho0 * n * n / 2)
    law = exact_growth_law(n, L0 // 2, theta)
    escaped = Fraction(0)
    for _ in range(m):
        nxt: dict = {}
        for code, p in law.items():
            for new, q in _reconnect_moves(n, to_matrix(n, code), theta, p1, p2, l_thresh):
                if L_cap is not None and half_edges_of(new, n) > L_cap:
                    escaped += p * q
                else:
                    _push(nxt, new, p * q)
        law = nxt
    return law, escaped


def tv_distance(p: dict, q: dict):
    """Total variation between two laws given as dicts (missing keys are zero)."""
    keys = set(p) | set(q)
    s = sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys)
    return s / 2 if isinstance(s, Fraction) else float(s) / 2


def condition(law: dict, pred) -> dict:
    sub = {k: v for k, v in law.items() if pred(k)}
    tot = sum(sub.values())
    return {k: v / tot for k, v in sub.items()} if tot else {}


# ---------------------------------------------------------------- naive densities


def naive_density(F, Z, kind: str, diagonal: bool = True) -> Fraction:
    """Loop over every map ``[k] -> [n]``; ``F`` and ``Z`` are square nested lists."""
    k, n = len(F), len(Z)
    hits = 0
    total = 0
    for sigma in itertools.product(range(n), repeat=k):
        if kind != "hom" and len(set(sigma)) < k:
            continue
        total += 1
        ok = True
        for i in range(k):
            for j in range(i, k):
                zv = Z[sigma[i]][sigma[j]]
                if kind == "ind":
                    if i == j and not diagonal:
                        continue
                    ok = zv == F[i][j]
                else:
                    ok = zv >= F[i][j]
                if not ok:
                    break
            if not ok:
                break
        hits += ok
    return Fraction(hits, total) if total else Fraction(0)


def naive_patterns(count: int, max_k: int = 3) -> list[list[list[int]]]:
    """First ``count`` patterns by (k + multiplicity, k, multiplicity, upper triangle)."""
    found = []
    grade = 1
    while len(found) < count:
        for k in range(1, min(grade, max_k) + 1):
            t = grade - k
            pairs = upper_pairs(k)
            batch = []
            for units in itertools.product(range(t + 1), repeat=len(pairs)):
                if sum(units) != t:
                    continue
                batch.append(tuple(2 * u if i == j else u for (i, j), u in zip(pairs, units)))
            for up in sorted(batch):
                found.append(to_matrix(k, up))
        grade += 1
    return found[:count]


def naive_ms_distance(Z1, Z2, I_max: int = 64, R_max: int = 4, max_k: int = 3) -> float:
    """Truncated multigraph distance by direct double loops."""
    total = Fraction(0)
    for i, F in enumerate(naive_patterns(I_max, max_k), start=1):
        total += Fraction(1, 2**i) * abs(naive_density(F, Z1, "hom") - naive_density(F, Z2, "hom"))
    for r in range(R_max + 1):
        K2 = [[0, r], [r, 0]]
        total += abs(naive_density(K2, Z1, "ind", diagonal=False) - naive_density(K2, Z2, "ind", diagonal=False))
        Lr = [[2 * r]]
        total += abs(naive_density(Lr, Z1, "ind") - naive_density(Lr, Z2, "ind"))
    return float(total)
