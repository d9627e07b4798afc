"""Finite multigraphs, patterns and subgraph densities.

A multigraph on ``n`` vertices is stored as an edge list of half-edge
owners plus an adjacency ``z`` with ``z[i, j]`` the number of ``ij`` edges
and ``z[i, i]`` twice the number of loops at ``i``.  Degrees are row sums,
so a loop contributes two.  Vertices are 0-based in code and 1-based in
the text format.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .estimate import Estimate

DENSE_MAX_N = 2048
DEFAULT_BUDGET = 10_000_000


class BudgetExceeded(ValueError):
    """Raised when an exact enumeration would exceed its work budget."""


class GraphFormatError(ValueError):
    pass


# ---------------------------------------------------------------- patterns


class Pattern:
    """A small multigraph ``F`` given by its adjacency (diagonal = 2 * loops)."""

    __slots__ = ("_a",)

    def __init__(self, a):
        arr = np.asarray(a)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ValueError("pattern adjacency must be a non-empty square matrix")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError("pattern adjacency must be integral")
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ValueError("pattern multiplicities must be non-negative")
        if not np.array_equal(arr, arr.T):
            raise ValueError("pattern adjacency must be symmetric")
        if np.any(np.diag(arr) % 2):
            raise ValueError("pattern diagonal must be even (twice the loop count)")
        self._a = tuple(tuple(int(v) for v in row) for row in arr)

    @classmethod
    def from_upper(cls, k: int, upper) -> "Pattern":
        a = np.zeros((k, k), dtype=np.int64)
        it = iter(upper)
        for i in range(k):
            for j in range(i, k):
                a[i, j] = a[j, i] = next(it)
        return cls(a)

    @property
    def k(self) -> int:
        return len(self._a)

    @property
    def a(self) -> np.ndarray:
        return np.array(self._a, dtype=np.int64)

    def upper(self) -> tuple:
        return tuple(self._a[i][j] for i in range(self.k) for j in range(i, self.k))

    @property
    def edges(self) -> int:
        return sum(self._a[i][j] for i in range(self.k) for j in range(i + 1, self.k))

    @property
    def loops(self) -> int:
        return sum(self._a[i][i] // 2 for i in range(self.k))

    @property
    def multiplicity(self) -> int:
        return self.edges + self.loops

    def pairs(self) -> list[tuple[int, int, int]]:
        """All ``(i, j, a_ij)`` with ``i <= j``."""
        return [(i, j, self._a[i][j]) for i in range(self.k) for j in range(i, self.k)]

    def __eq__(self, other):
        return isinstance(other, Pattern) and self._a == other._a

    def __hash__(self):
        return hash(self._a)

    def __repr__(self):
        return f"Pattern({[list(r) for r in self._a]})"


def K2(r: int) -> Pattern:
    """Two vertices joined by ``r`` parallel edges, no loops."""
    return Pattern([[0, r], [r, 0]])


def loop_pattern(r: int) -> Pattern:
    """One vertex carrying ``r`` loops."""
    return Pattern([[2 * r]])


def empty_pattern(k: int) -> Pattern:
    return Pattern(np.zeros((k, k), dtype=np.int64))


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def patterns_of(k: int, t: int) -> list[Pattern]:
    """Patterns on ``k`` vertices with ``edges + loops == t``, lexicographic in the upper triangle."""
    diag = [i == j for i in range(k) for j in range(i, k)]
    uppers = []
    for units in _compositions(t, len(diag)):
        uppers.append(tuple(2 * u if d else u for u, d in zip(units, diag)))
    uppers.sort()
    return [Pattern.from_upper(k, up) for up in uppers]


def enumerate_patterns(max_k: int = 3) -> Iterator[Pattern]:
    """Every pattern with at most ``max_k`` vertices, each exactly once.

    Ordered by ``k + multiplicity``, then ``k``, then multiplicity, then
    lexicographically by the upper triangle.
    """
    grade = 1
    while True:
        for k in range(1, min(grade, max_k) + 1):
            yield from patterns_of(k, grade - k)
        grade += 1


def pattern_list(count: int, max_k: int = 3) -> list[Pattern]:
    return list(itertools.islice(enumerate_patterns(max_k), count))


# ---------------------------------------------------------------- multigraphs


class Multigraph:
    """Mutable multigraph with simultaneous edge-list and adjacency views."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self._n = n
        self._dense = n <= DENSE_MAX_N
        self._adj = np.zeros((n, n), dtype=np.int64) if self._dense else {}
        self._deg = np.zeros(n, dtype=np.int64)
        self._ends = np.zeros(16, dtype=np.int64)
        self._L = 0
        for i, j in edges:
            self.add_edge(i, j)

    @classmethod
    def from_adjacency(cls, z) -> "Multigraph":
        z = np.asarray(z)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(z, z.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(z < 0):
            raise ValueError("multiplicities must be non-negative")
        if np.any(np.diag(z) % 2):
            raise ValueError("diagonal must be even (twice the loop count)")
        n = z.shape[0]
        g = cls(n)
        g._reserve(int(z.sum()))
        if g._dense:
            z = z.astype(np.int64)
            iu, ju = np.triu_indices(n)
            cnt = np.where(iu == ju, z[iu, ju] // 2, z[iu, ju])
            ends = np.empty((int(cnt.sum()), 2), dtype=np.int64)
            ends[:, 0] = np.repeat(iu, cnt)
            ends[:, 1] = np.repeat(ju, cnt)
            g._L = 2 * ends.shape[0]
            g._ends[: g._L] = ends.ravel()
            g._adj[:, :] = z
            g._deg[:] = z.sum(axis=1)
            return g
        for i in range(n):
            for _ in range(int(z[i, i]) // 2):
                g.add_loop(i)
            for j in range(i + 1, n):
                for _ in range(int(z[i, j])):
                    g.add_edge(i, j)
        return g

    @classmethod
    def from_code(cls, n: int, upper) -> "Multigraph":
        return cls.from_adjacency(Pattern.from_upper(n, upper).a) if n else cls(0)

    # -- views

    @property
    def n(self) -> int:
        return self._n

    @property
    def L(self) -> int:
        """Number of half-edges (twice the edge-list length)."""
        return self._L

    @property
    def num_entries(self) -> int:
        return self._L // 2

    @property
    def degrees(self) -> np.ndarray:
        d = self._deg.view()
        d.flags.writeable = False
        return d

    @property
    def edge_list(self) -> np.ndarray:
        e = self._ends[: self._L].reshape(-1, 2).view()
        e.flags.writeable = False
        return e

    @property
    def adj(self) -> np.ndarray:
        if self._dense:
            a = self._adj.view()
            a.flags.writeable = False
            return a
        a = np.zeros((self._n, self._n), dtype=np.int64)
        for (i, j), v in self._adj.items():
            a[i, j] = a[j, i] = v
        return a

    def mult(self, i: int, j: int) -> int:
        if self._dense:
            return int(self._adj[i, j])
        return self._adj.get((min(i, j), max(i, j)), 0)

    def mults(self, i, j) -> np.ndarray:
        i = np.asarray(i)
        j = np.asarray(j)
        if self._dense:
            return self._adj[i, j]
        lo = np.minimum(i, j).ravel()
        hi = np.maximum(i, j).ravel()
        vals = np.fromiter((self._adj.get((a, b), 0) for a, b in zip(lo.tolist(), hi.tolist())),
                           dtype=np.int64, count=lo.size)
        return vals.reshape(i.shape)

    def diagonal(self) -> np.ndarray:
        if self._dense:
            return np.diag(self._adj).copy()
        d = np.zeros(self._n, dtype=np.int64)
        for (i, j), v in self._adj.items():
            if i == j:
                d[i] = v
        return d

    @property
    def num_loops(self) -> int:
        return int(self.diagonal().sum()) // 2

    @property
    def num_edges(self) -> int:
        return self.num_entries - self.num_loops

    def max_multiplicity(self) -> tuple[int, int]:
        """Largest off-diagonal multiplicity and largest loop count."""
        if self._n == 0:
            return 0, 0
        if self._dense:
            off = self._adj.copy()
            np.fill_diagonal(off, 0)
            return int(off.max()), int(np.diag(self._adj).max()) // 2
        off = max((v for (i, j), v in self._adj.items() if i != j), default=0)
        return off, int(self.diagonal().max()) // 2

    def code(self) -> tuple:
        a = self.adj
        return tuple(int(a[i, j]) for i in range(self._n) for j in range(i, self._n))

    # -- mutation

    def _check_vertex(self, i):
        if not 0 <= i < self._n:
            raise IndexError(f"vertex {i} out of range for n={self._n}")

    def _reserve(self, half_edges: int):
        if half_edges > self._ends.size:
            cap = max(half_edges, 2 * self._ends.size)
            new = np.zeros(cap, dtype=np.int64)
            new[: self._L] = self._ends[: self._L]
            self._ends = new

    def _link(self, i, j, sign):
        if self._dense:
            if i == j:
                self._adj[i, i] += 2 * sign
            else:
                self._adj[i, j] += sign
                self._adj[j, i] += sign
        else:
            key = (min(i, j), max(i, j))
            v = self._adj.get(key, 0) + (2 * sign if i == j else sign)
            if v:
                self._adj[key] = v
            else:
                self._adj.pop(key, None)

    def add_edge(self, i: int, j: int) -> None:
        """Append an ``ij`` edge (a loop if ``i == j``)."""
        i, j = int(i), int(j)
        self._check_vertex(i)
        self._check_vertex(j)
        self._reserve(self._L + 2)
        self._ends[self._L] = i
        self._ends[self._L + 1] = j
        self._L += 2
        self._link(i, j, 1)
        self._deg[i] += 1
        self._deg[j] += 1

    def add_loop(self, i: int) -> None:
        self.add_edge(i, i)

    def remove_entry(self, idx: int) -> tuple[int, int]:
        """Delete edge-list entry ``idx`` by swapping in the last entry."""
        if not 0 <= idx < self.num_entries:
            raise IndexError("edge index out of range")
        v, w = int(self._ends[2 * idx]), int(self._ends[2 * idx + 1])
        self._link(v, w, -1)
        self._deg[v] -= 1
        self._deg[w] -= 1
        self._ends[2 * idx] = self._ends[self._L - 2]
        self._ends[2 * idx + 1] = self._ends[self._L - 1]
        self._L -= 2
        return v, w

    def move_half_edge(self, idx: int, end: int, vertex: int) -> None:
        """Reattach end ``end`` (0 or 1) of entry ``idx`` to ``vertex``."""
        if not 0 <= idx < self.num_entries or end not in (0, 1):
            raise IndexError("half-edge out of range")
        self._check_vertex(vertex)
        slot = 2 * idx + end
        old = int(self._ends[slot])
        other = int(self._ends[slot ^ 1])
        self._link(other, old, -1)
        self._link(other, vertex, 1)
        self._ends[slot] = vertex
        self._deg[old] -= 1
        self._deg[vertex] += 1

    # -- misc

    def copy(self) -> "Multigraph":
        g = Multigraph(self._n)
        g._adj = self._adj.copy()
        g._deg = self._deg.copy()
        g._ends = self._ends.copy()
        g._L = self._L
        return g

    def relabel(self, perm) -> "Multigraph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self._n)):
            raise ValueError("not a permutation")
        e = self.edge_list
        return Multigraph(self._n, zip(perm[e[:, 0]].tolist(), perm[e[:, 1]].tolist()))

    def check_invariants(self) -> None:
        n = self._n
        z = np.zeros((n, n), dtype=np.int64)
        deg = np.zeros(n, dtype=np.int64)
        for v, w in self.edge_list.tolist():
            if v == w:
                z[v, v] += 2
            else:
                z[v, w] += 1
                z[w, v] += 1
            deg[v] += 1
            deg[w] += 1
        a = self.adj
        assert np.array_equal(z, a), "adjacency out of sync with edge list"
        assert np.array_equal(deg, self._deg), "degrees out of sync"
        assert np.array_equal(a.sum(axis=1), self._deg), "degree is not the row sum"
        assert int(self._deg.sum()) == self._L, "handshake identity violated"
        assert not np.any(np.diag(a) % 2), "odd diagonal"

    def __eq__(self, other):
        return isinstance(other, Multigraph) and self._n == other._n and self.code() == other.code()

    def __hash__(self):
        return hash((self._n, self.code()))

    def __repr__(self):
        return f"Multigraph(n={self._n}, entries={self.num_entries})"


def erased(g: Multigraph) -> Multigraph:
    """Simple graph with an edge wherever ``g`` has at least one off-diagonal edge."""
    a = g.adj
    i, j = np.nonzero(np.triu(a, 1))
    return Multigraph(g.n, zip(i.tolist(), j.tolist()))


# ---------------------------------------------------------------- densities


def _falling(n: int, k: int) -> int:
    return math.perm(n, k) if k <= n else 0


def _meets(vals, target, kind):
    return vals == target if kind == "ind" else vals >= target


def _count(F: Pattern, G: Multigraph, kind: str, diagonal: bool, budget: int) -> tuple[int, int]:
    n, k = G.n, F.k
    injective = kind != "hom"
    total = n**k if not injective else _falling(n, k)
    if total == 0:
        return 0, 0
    if total > budget:
        raise BudgetExceeded(f"{total} maps exceed budget {budget}")
    check_diag = diagonal or kind != "ind"
    a = F.a
    d = G.diagonal()
    if k == 1:
        ok = _meets(d, a[0, 0], kind) if check_diag else np.ones(n, dtype=bool)
        return int(ok.sum()), total
    if k == 2 and G._dense:
        ok = _meets(G._adj, a[0, 1], kind)
        if check_diag:
            ok = ok & _meets(d, a[0, 0], kind)[:, None] & _meets(d, a[1, 1], kind)[None, :]
        count = int(ok.sum())
        if injective:
            count -= int(np.trace(ok))
        return count, total
    rest = np.indices((n,) * (k - 1)).reshape(k - 1, -1)
    count = 0
    for v in range(n):
        sigma = np.vstack([np.full(rest.shape[1], v), rest])
        ok = np.ones(sigma.shape[1], dtype=bool)
        if injective:
            for i in range(k):
                for j in range(i + 1, k):
                    ok &= sigma[i] != sigma[j]
        for i, j, aij in F.pairs():
            if i == j and not check_diag:
                continue
            ok &= _meets(G.mults(sigma[i], sigma[j]), aij, kind)
        count += int(ok.sum())
    return count, total


def _density(F, G, kind, diagonal=True, budget=DEFAULT_BUDGET) -> Fraction:
    count, total = _count(F, G, kind, diagonal, budget)
    return Fraction(count, total) if total else Fraction(0)


def hom_density(F: Pattern, G: Multigraph, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Fraction of all maps ``[k] -> [n]`` with ``a_ij <= z`` on every pair, diagonal included."""
    return _density(F, G, "hom", budget=budget)


def inj_density(F: Pattern, G: Multigraph, budget: int = DEFAULT_BUDGET) -> Fraction:
    """As :func:`hom_density` over injective maps; zero when ``k > n``."""
    return _density(F, G, "inj", budget=budget)


def ind_density(F: Pattern, G: Multigraph, budget: int = DEFAULT_BUDGET,
                diagonal: bool = True) -> Fraction:
    """Fraction of injective maps with ``a_ij == z`` on every pair.

    With ``diagonal=False`` the loop entries of ``F`` and ``G`` are not
    compared, which turns ``K2(r)`` into the law of the multiplicity of a
    uniformly chosen pair of distinct vertices.
    """
    return _density(F, G, "ind", diagonal, budget)


def pair_multiplicity_density(G: Multigraph, r: int) -> Fraction:
    """Share of ordered distinct pairs joined by exactly ``r`` edges."""
    return ind_density(K2(r), G, budget=max(DEFAULT_BUDGET, G.n**2), diagonal=False)


def loop_multiplicity_density(G: Multigraph, r: int) -> Fraction:
    """Share of vertices carrying exactly ``r`` loops."""
    return ind_density(loop_pattern(r), G)


def sample_injections(n: int, k: int, size: int, rng) -> np.ndarray:
    """``size`` uniform injective maps ``[k] -> [n]`` as a (k, size) array."""
    return _sample_maps(n, k, size, True, rng)


def _sample_maps(n, k, size, injective, rng) -> np.ndarray:
    sigma = rng.integers(0, n, size=(k, size))
    if not injective or k == 1:
        return sigma
    bad = np.zeros(size, dtype=bool)
    while True:
        bad[:] = False
        for i in range(k):
            for j in range(i + 1, k):
                bad |= sigma[i] == sigma[j]
        nb = int(bad.sum())
        if nb == 0:
            return sigma
        sigma[:, bad] = rng.integers(0, n, size=(k, nb))


def sampled_density(F: Pattern, G: Multigraph, kind: str, N: int, rng,
                    diagonal: bool = True) -> Estimate:
    """Unbiased estimate of a density from ``N`` uniform (injective for inj/ind) maps."""
    if kind not in ("hom", "inj", "ind"):
        raise ValueError(f"unknown density kind {kind!r}")
    k = F.k
    if kind != "hom" and k > G.n:
        return Estimate.exact(0.0, N)
    sigma = _sample_maps(G.n, k, N, kind != "hom", rng)
    ok = np.ones(N, dtype=bool)
    for i, j, aij in F.pairs():
        if i == j and kind == "ind" and not diagonal:
            continue
        ok &= _meets(G.mults(sigma[i], sigma[j]), aij, kind)
    return Estimate.from_samples(ok.astype(float))


# ---------------------------------------------------------------- distance


@dataclass(frozen=True)
class Distance:
    value: float
    truncation_bound: float


def default_r_max(*graphs: Multigraph) -> int:
    return max(max(g.max_multiplicity()) for g in graphs) + 1


def ms_distance_graphs(G1: Multigraph, G2: Multigraph, I_max: int = 64,
                       R_max: int | None = None, max_k: int = 3,
                       budget: int = DEFAULT_BUDGET) -> Distance:
    """Truncated multigraph distance with a certified bound on the omitted terms.

    Weighted homomorphism-density differences over the first ``I_max``
    patterns, plus the total-variation-like sums over pair multiplicities and
    loop counts up to ``R_max``.
    """
    if R_max is None:
        R_max = default_r_max(G1, G2)
    value = Fraction(0)
    for i, F in enumerate(pattern_list(I_max, max_k), start=1):
        value += Fraction(1, 2**i) * abs(hom_density(F, G1, budget) - hom_density(F, G2, budget))
    remainder = Fraction(1, 2**I_max)
    for dens, has in ((pair_multiplicity_density, lambda g: g.n >= 2),
                      (loop_multiplicity_density, lambda g: g.n >= 1)):
        s1 = s2 = Fraction(0)
        for r in range(R_max + 1):
            t1, t2 = dens(G1, r), dens(G2, r)
            value += abs(t1 - t2)
            s1 += t1
            s2 += t2
        remainder += (int(has(G1)) - s1) + (int(has(G2)) - s2)
    return Distance(float(value), float(remainder))


# ---------------------------------------------------------------- text format


def parse_graph(text: str) -> Multigraph:
    """Parse the edge-list format: vertex count, then one ``i j`` per entry (1-based)."""
    lines = [(no, ln.split("#", 1)[0].strip()) for no, ln in enumerate(text.splitlines(), 1)]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines:
        raise GraphFormatError("empty graph file")
    no, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise GraphFormatError(f"line {no}: expected vertex count, got {head!r}") from None
    if n < 0:
        raise GraphFormatError(f"line {no}: negative vertex count")
    g = Multigraph(n)
    for no, ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {no}: expected two vertex ids, got {ln!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {no}: non-integer vertex id in {ln!r}") from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphFormatError(f"line {no}: vertex id out of range 1..{n}")
        g.add_edge(i - 1, j - 1)
    return g


def format_graph(g: Multigraph) -> str:
    out = [str(g.n)]
    out.extend(f"{v + 1} {w + 1}" for v, w in g.edge_list.tolist())
    return "\n".join(out) + "\n"


def read_graph(path) -> Multigraph:
    with open(path) as fh:
        return parse_graph(fh.read())
