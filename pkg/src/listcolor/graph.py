"""Immutable simple graphs, bounded-radius neighbourhoods, clique checks and
seeded fixture generators."""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Labelled simple graph on vertices ``0..n-1``.

    Labels double as the total order used to rank flaws, so they are fixed at
    construction and never reassigned.
    """

    n: int
    adj: tuple[tuple[int, ...], ...]
    max_degree: int
    _balls: dict = field(default_factory=dict, repr=False, compare=False)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.n, self.adj))

    @cached_property
    def nbr_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adj)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.nbr_sets[u]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, w) for u in range(self.n) for w in self.adj[u] if u < w]

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def check_vertex(self, v: int) -> None:
        if not (isinstance(v, int) and 0 <= v < self.n):
            raise GraphError(f"vertex {v!r} not in 0..{self.n - 1}")

    def ball(self, v: int, d: int) -> tuple[int, ...]:
        """Sorted vertices within distance ``d`` of ``v`` (cached for d <= 3)."""
        self.check_vertex(v)
        if d < 0:
            raise GraphError("distance must be non-negative")
        key = (v, d)
        hit = self._balls.get(key)
        if hit is not None:
            return hit
        out = tuple(sorted(_bfs(self.adj, v, d)))
        if d <= 3:
            self._balls[key] = out
        return out

    def ball_set(self, v: int, d: int) -> frozenset[int]:
        key = (v, d, "set")
        hit = self._balls.get(key)
        if hit is None:
            hit = self._balls[key] = frozenset(self.ball(v, d))
        return hit


def _bfs(adj: Sequence[Sequence[int]], v: int, d: int) -> set[int]:
    seen = {v}
    frontier = [v]
    for _ in range(d):
        nxt = []
        for x in frontier:
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if not nxt:
            break
        frontier = nxt
    return seen


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    if n < 0:
        raise GraphError("vertex count must be non-negative")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        u, v = e
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge {tuple(e)!r}: endpoint out of range 0..{n - 1}")
        if u == v:
            raise GraphError(f"edge {tuple(e)!r}: self-loop")
        nbrs[u].add(v)
        nbrs[v].add(u)
    adj = tuple(tuple(sorted(s)) for s in nbrs)
    return Graph(n, adj, max((len(a) for a in adj), default=0))


def within_distance(g: Graph, v: int, d: int) -> list[int]:
    return list(g.ball(v, d))


def omega(g: Graph, v: int, ell: int) -> int:
    """The ``ell``-th (1-indexed) vertex of the radius-3 ball around ``v``."""
    ball = g.ball(v, 3)
    if not 1 <= ell <= len(ball):
        raise IndexError(f"ell={ell} outside 1..{len(ball)} for vertex {v}")
    return ball[ell - 1]


def omega_index(g: Graph, v: int, w: int) -> int:
    """Inverse of :func:`omega`: the rank of ``w`` in the radius-3 ball of ``v``."""
    ball = g.ball(v, 3)
    i = bisect.bisect_left(ball, w)
    if i == len(ball) or ball[i] != w:
        raise GraphError(f"vertex {w} is not within distance 3 of {v}")
    return i + 1


def is_triangle_free(g: Graph) -> bool:
    sets = g.nbr_sets
    for u in range(g.n):
        su = sets[u]
        for w in g.adj[u]:
            if w > u and not su.isdisjoint(sets[w]):
                return False
    return True


def clique_number_at_most(g: Graph, r_minus_1: int) -> bool:
    """True iff ``g`` has no clique on ``r_minus_1 + 1`` vertices."""
    if r_minus_1 < 1:
        raise GraphError("r_minus_1 must be >= 1")
    return not has_clique(g, r_minus_1 + 1)


def has_clique(g: Graph, k: int) -> bool:
    if k <= 0:
        return True
    if k == 1:
        return g.n > 0
    if k == 2:
        return g.edge_count > 0
    sets = g.nbr_sets

    # vertices of degree < k-1 can never be in a k-clique
    def extend(size: int, cand: set[int]) -> bool:
        if size == k:
            return True
        if size + len(cand) < k:
            return False
        for x in sorted(cand):
            cand = cand - {x}
            if extend(size + 1, cand & sets[x]):
                return True
            if size + len(cand) < k:
                return False
        return False

    for v in range(g.n):
        if len(g.adj[v]) < k - 1:
            continue
        higher = {w for w in g.adj[v] if w > v and len(g.adj[w]) >= k - 1}
        if extend(1, higher):
            return True
    return False


def induced_subgraph(g: Graph, vertices: Sequence[int]) -> tuple[Graph, list[int]]:
    """Induced subgraph relabelled to ``0..k-1`` in the order of ``vertices``."""
    index = {v: i for i, v in enumerate(vertices)}
    edges = [
        (index[u], index[w])
        for u in vertices
        for w in g.adj[u]
        if w in index and index[u] < index[w]
    ]
    return build_graph(len(vertices), edges), list(vertices)


# -- generators ---------------------------------------------------------------

GENERATORS = (
    "cycle",
    "path",
    "bipartite",
    "regular-bipartite",
    "erase-triangles",
    "multipartite",
    "random-multipartite",
)


@dataclass(frozen=True)
class GeneratorSpec:
    """Generator descriptor, written ``kind:arg,arg,...`` on the command line.

    ``bipartite:n1,n2,p``, ``regular-bipartite:n,d``, ``erase-triangles:n,p``,
    ``multipartite:s1,s2,...``, ``random-multipartite:k,s,p`` (k parts of
    size s), ``cycle:n`` and ``path:n``.
    """

    kind: str
    args: tuple[float, ...]

    @classmethod
    def parse(cls, text: str) -> "GeneratorSpec":
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        if kind not in GENERATORS:
            raise GraphError(f"unknown generator {kind!r}; expected one of {', '.join(GENERATORS)}")
        try:
            args = tuple(float(a) for a in rest.split(",") if a.strip())
        except ValueError as exc:
            raise GraphError(f"malformed generator arguments in {text!r}") from exc
        spec = cls(kind, args)
        spec._validate()
        return spec

    def __str__(self) -> str:
        return f"{self.kind}:" + ",".join(_fmt_num(a) for a in self.args)

    def _validate(self) -> None:
        # kind -> (arity, number of leading integer arguments); None = variadic
        shape = {
            "cycle": (1, 1),
            "path": (1, 1),
            "bipartite": (3, 2),
            "regular-bipartite": (2, 2),
            "erase-triangles": (2, 1),
            "random-multipartite": (3, 2),
            "multipartite": (None, None),
        }
        arity, n_int = shape[self.kind]
        if arity is None:
            if not self.args:
                raise GraphError("multipartite needs at least one part size")
            n_int = len(self.args)
        elif len(self.args) != arity:
            raise GraphError(f"{self.kind} takes {arity} arguments, got {len(self.args)}")
        if any(a != int(a) or a < 0 for a in self.args[:n_int]):
            raise GraphError(f"{self.kind}: sizes must be non-negative integers")
        if n_int < len(self.args) and not 0.0 <= self.args[-1] <= 1.0:
            raise GraphError(f"{self.kind}: probability {self.args[-1]} outside [0, 1]")
        if self.kind == "cycle" and self.args[0] < 3:
            raise GraphError("cycle needs at least 3 vertices")
        if self.kind == "regular-bipartite" and self.args[1] > self.args[0]:
            raise GraphError("regular-bipartite: degree exceeds side size")


def _fmt_num(x: float) -> str:
    return str(int(x)) if x == int(x) else repr(x)


def generate(spec: GeneratorSpec | str, seed: int) -> Graph:
    """Build a fixture graph; deterministic in ``(spec, seed)``."""
    if isinstance(spec, str):
        spec = GeneratorSpec.parse(spec)
    rng = random.Random(f"graph:{spec}:{seed}")
    a = spec.args
    if spec.kind == "cycle":
        n = int(a[0])
        return build_graph(n, [(i, (i + 1) % n) for i in range(n)])
    if spec.kind == "path":
        n = int(a[0])
        return build_graph(n, [(i, i + 1) for i in range(n - 1)])
    if spec.kind == "bipartite":
        n1, n2, p = int(a[0]), int(a[1]), a[2]
        edges = [(i, n1 + j) for i in range(n1) for j in range(n2) if rng.random() < p]
        return build_graph(n1 + n2, edges)
    if spec.kind == "regular-bipartite":
        return _regular_bipartite(int(a[0]), int(a[1]), rng)
    if spec.kind == "erase-triangles":
        return _erase_triangles(int(a[0]), a[1], rng)
    if spec.kind == "multipartite":
        return complete_multipartite([int(s) for s in a])
    if spec.kind == "random-multipartite":
        k, s, p = int(a[0]), int(a[1]), a[2]
        part = [i // s for i in range(k * s)] if s else []
        edges = [
            (u, w)
            for u, w in combinations(range(k * s), 2)
            if part[u] != part[w] and rng.random() < p
        ]
        return build_graph(k * s, edges)
    raise GraphError(f"unknown generator {spec.kind!r}")


def complete_multipartite(sizes: Sequence[int]) -> Graph:
    part = [i for i, s in enumerate(sizes) for _ in range(s)]
    n = len(part)
    return build_graph(n, [(u, w) for u, w in combinations(range(n), 2) if part[u] != part[w]])


def _regular_bipartite(n: int, d: int, rng: random.Random) -> Graph:
    # union of d edge-disjoint perfect matchings between the two sides
    for _ in range(1000):
        taken: set[tuple[int, int]] = set()
        ok = True
        for _ in range(d):
            for _ in range(200):
                perm = list(range(n))
                rng.shuffle(perm)
                m = {(i, n + perm[i]) for i in range(n)}
                if taken.isdisjoint(m):
                    taken |= m
                    break
            else:
                ok = False
                break
        if ok:
            return build_graph(2 * n, sorted(taken))
    raise GraphError(f"could not sample a {d}-regular bipartite graph on {n}+{n} vertices")


def _erase_triangles(n: int, p: float, rng: random.Random) -> Graph:
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for u, w in combinations(range(n), 2):
        if rng.random() < p:
            nbrs[u].add(w)
            nbrs[w].add(u)
    # delete one edge per remaining triangle, scanning in label order
    for u in range(n):
        for w in sorted(nbrs[u]):
            if w <= u or w not in nbrs[u]:
                continue
            while nbrs[u] & nbrs[w]:
                x = min(nbrs[u] & nbrs[w])
                victim = rng.choice([(u, w), (u, x), (w, x)])
                a, b = victim
                nbrs[a].discard(b)
                nbrs[b].discard(a)
                if w not in nbrs[u]:
                    break
    return build_graph(n, [(u, w) for u in range(n) for w in nbrs[u] if u < w])


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(10, outer + spokes + inner)
