import itertools
import random

import pytest

from listcolor.coloring import BLANK, ListAssignment
from listcolor.graph import Graph, build_graph


def brute_independent_sets(g: Graph) -> int:
    """Subset filtering over all 2^n vertex sets."""
    edges = list(g.edges())
    total = 0
    for mask in range(1 << g.n):
        if all(not (mask >> u & 1 and mask >> v & 1) for u, v in edges):
            total += 1
    return total


def brute_bfs_ball(g: Graph, v: int, d: int) -> list[int]:
    dist = {v: 0}
    frontier = [v]
    while frontier:
        nxt = []
        for x in frontier:
            for y in g.adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        frontier = nxt
    return sorted(w for w, k in dist.items() if k <= d)


def has_k_clique_brute(g: Graph, k: int) -> bool:
    return any(
        all(g.has_edge(a, b) for a, b in itertools.combinations(c, 2))
        for c in itertools.combinations(range(g.n), k)
    )


def random_graph(n: int, p: float, seed: int) -> Graph:
    rng = random.Random(seed)
    return build_graph(n, [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p])


def random_partial(g: Graph, lists: ListAssignment, seed: int, blank_prob: float = 0.4) -> list:
    """A random partial proper list colouring built vertex by vertex."""
    rng = random.Random(seed)
    sigma = [BLANK] * g.n
    for v in rng.sample(range(g.n), g.n):
        if rng.random() < blank_prob:
            continue
        free = sorted(c for c in lists[v] if all(sigma[u] != c for u in g.adj[v]))
        if free:
            sigma[v] = rng.choice(free)
    return sigma


@pytest.fixture
def c6():
    return build_graph(6, [(i, (i + 1) % 6) for i in range(6)])
