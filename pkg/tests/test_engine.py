import random

import pytest

from listcolor.coloring import BLANK, ListAssignment
from listcolor.engine import ColoringState
from listcolor.flaws import FlawParams, Variant, all_flaws, least_flaw_in_range
from listcolor.graph import generate

from conftest import random_graph


@pytest.mark.parametrize("variant", [Variant.TRIANGLE_FREE, Variant.CLIQUE_FREE])
@pytest.mark.parametrize("seed", range(8))
def test_incremental_flaws_match_recomputation(variant, seed):
    """Random edits, including improper ones, keep the cached flaw sets exact."""
    rng = random.Random(seed)
    g = random_graph(25, 0.15, seed)
    lists = ListAssignment.uniform(g.n, 4, 7, seed)
    p = FlawParams(variant, 2.5 if variant is Variant.TRIANGLE_FREE else 2, r=4 if variant is Variant.CLIQUE_FREE else None)
    state = ColoringState(g, lists, [BLANK] * g.n, p)
    state.check_consistency()
    for _ in range(60):
        batch = {}
        for _ in range(rng.randint(1, 5)):
            u = rng.randrange(g.n)
            batch[u] = rng.choice([BLANK, *sorted(lists[u])])
        state.assign(batch)
        state.check_consistency()
        v = rng.randrange(g.n)
        assert state.least_in_range(v) == least_flaw_in_range(g, lists, state.sigma, v, p)
        assert state.flaw_count() == len(all_flaws(g, lists, state.sigma, p))


def test_external_lists_match_reference():
    from listcolor.coloring import external_list

    g = generate("random-multipartite:3,5,0.6", 2)
    lists = ListAssignment.uniform(g.n, 3, 4, 2)
    rng = random.Random(0)
    sigma = [rng.choice([BLANK, *sorted(lists[u])]) for u in range(g.n)]
    state = ColoringState(g, lists, sigma, FlawParams(Variant.CLIQUE_FREE, 2, r=4))
    for v in range(g.n):
        for u in g.adj[v]:
            assert state.external(v, u) == external_list(g, lists, sigma, v, u)
