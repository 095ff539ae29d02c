import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from listcolor.coloring import BLANK, ListAssignment
from listcolor.flaws import (
    B,
    Flaw,
    FlawParams,
    Variant,
    Z,
    all_flaws,
    b_holds,
    flaw_holds,
    least_flaw_in_range,
    z_holds_kr,
    z_holds_tf,
    z_sum,
)
from listcolor.graph import build_graph, generate

from conftest import random_graph, random_partial

TF = Variant.TRIANGLE_FREE
KR = Variant.CLIQUE_FREE


def star(k):
    return build_graph(k + 1, [(0, i) for i in range(1, k + 1)])


def test_b_holds_examples():
    iso = build_graph(1, [])
    five = ListAssignment.from_lists([{1, 2, 3, 4, 5}])
    assert not b_holds(iso, five, [BLANK], 0, FlawParams(TF, 3))
    g = star(2)
    lists = ListAssignment.from_lists([{1, 2}, {1}, {2}])
    assert b_holds(g, lists, [BLANK, 1, 2], 0, FlawParams(TF, 2))
    lists = ListAssignment.from_lists([{1, 2, 3}, {1}, {2}])
    # L_v = {3, Blank} has size 2; at L=2 the strict inequality fails
    assert not b_holds(g, lists, [BLANK, 1, BLANK], 0, FlawParams(TF, 3))
    assert b_holds(g, lists, [BLANK, 1, 2], 0, FlawParams(TF, 3))
    three = ListAssignment.from_lists([{1, 2}, {5}, {5}])
    assert not b_holds(g, three, [BLANK] * 3, 0, FlawParams(TF, 3))


def _z_star(L):
    # centre 0 with four Blank leaves whose lists contain 1; C_0 = {1}
    g = star(4)
    lists = ListAssignment.from_lists([{1}] + [{1, 2}] * 4)
    sigma = [BLANK] * 5
    return g, lists, sigma, FlawParams(TF, L)


def test_z_tf_examples_by_hand():
    g, lists, sigma, p = _z_star(10)
    # hand oracle: L_0 = {1, Blank}; T_{0,1} = all four leaves; T_{0,Blank} empty
    assert z_sum(g, lists, sigma, 0) == 4
    assert 4 > 10 * 2 / 10
    assert z_holds_tf(g, lists, sigma, 0, p)
    g, lists, sigma, p = _z_star(40)
    assert not 4 > 40 * 2 / 10
    assert not z_holds_tf(g, lists, sigma, 0, p)
    nb = ListAssignment.from_lists([{1}, {2}, {2}, {2}, {2}])
    assert not z_holds_tf(g, nb, [BLANK, 2, 2, 2, 2], 0, FlawParams(TF, 0.001))


def test_z_kr_examples():
    g = star(5)
    lists = ListAssignment.uniform(6, 2, 2)
    assert z_holds_kr(g, lists, [BLANK] * 6, 0, FlawParams(KR, 5, r=4))
    assert not z_holds_kr(g, lists, [BLANK] * 6, 0, FlawParams(KR, 5.5, r=4))
    assert not z_holds_kr(build_graph(1, []), ListAssignment.uniform(1, 1, 1), [BLANK], 0, FlawParams(KR, 0.5, r=4))


def test_flaw_params_validation():
    with pytest.raises(ValueError):
        FlawParams(TF, 0)
    with pytest.raises(ValueError):
        FlawParams(KR, 2, r=3)
    with pytest.raises(ValueError):
        FlawParams(KR, 2)
    assert FlawParams("tf", 2).variant is TF
    assert FlawParams(TF, 1).radii == (2, 3)
    assert FlawParams(KR, 1, r=4).radii == (3, 2)


def test_flaw_order():
    assert B(7) < Z(3)
    assert B(3) < B(9)
    assert sorted([Z(1), B(5), Z(0), B(2)]) == [B(2), B(5), Z(0), Z(1)]


@given(st.tuples(st.sampled_from("BZ"), st.integers(0, 50)), st.tuples(st.sampled_from("BZ"), st.integers(0, 50)), st.tuples(st.sampled_from("BZ"), st.integers(0, 50)))
def test_flaw_order_is_strict_total(a, b, c):
    a, b, c = Flaw(*a), Flaw(*b), Flaw(*c)
    assert not a < a
    assert (a < b) + (b < a) + (a == b) == 1
    if a < b and b < c:
        assert a < c
    if a.kind != b.kind:
        assert (a < b) == (a.kind == "B")


def test_least_flaw_examples():
    g = generate("path:4", 0)
    lists = ListAssignment.from_lists([{1, 2, 3}] * 4)
    assert least_flaw_in_range(g, lists, [1, 2, 1, 2], 0, FlawParams(TF, 1)) is None
    # B_7 and Z_3 both hold within range of 5; the B flaw wins despite its larger label
    g = build_graph(10, [(i, i + 1) for i in range(9)])
    lists = ListAssignment.from_lists([{1, 2, 3}] * 7 + [{1}] + [{1, 2, 3}] * 2)
    sigma = [BLANK] * 10
    sigma[6] = 1
    p = FlawParams(TF, 1.5)
    assert b_holds(g, lists, sigma, 7, p) and z_holds_tf(g, lists, sigma, 3, p)
    assert least_flaw_in_range(g, lists, sigma, 5, p) == B(7)
    # only B_3 and B_9 hold: label order
    lists = ListAssignment.from_lists([{1, 2, 3}] * 3 + [{1}] + [{1, 2, 3}] * 5 + [{2}])
    sigma = [BLANK] * 10
    sigma[2], sigma[8] = 1, 2
    p = FlawParams(TF, 1.5)
    bs = [f for f in all_flaws(g, lists, sigma, p) if f.kind == "B"]
    assert bs == [B(3), B(9)]
    assert least_flaw_in_range(g, lists, sigma, 4, p) == B(3)
    assert min(bs) == B(3)


def test_least_flaw_prefers_b_then_label():
    # star of 8 leaves all coloured with C_0's colours: B_0; blanks elsewhere
    g = build_graph(10, [(0, i) for i in range(1, 10)])
    lists = ListAssignment.from_lists([{1, 2}] + [{1, 2}] * 9)
    sigma = [BLANK, 1, 2] + [BLANK] * 7
    p = FlawParams(TF, 2)
    assert least_flaw_in_range(g, lists, sigma, 3, p) == B(0)


def test_all_flaws_examples():
    iso = build_graph(4, [])
    lists = ListAssignment.uniform(4, 3, 3)
    assert all_flaws(iso, lists, [BLANK] * 4, FlawParams(TF, 4)) == []
    g = build_graph(4, [(0, 1), (0, 2), (0, 3)])
    assert Z(0) in all_flaws(g, lists, [BLANK] * 4, FlawParams(KR, 3, r=4))
    c4 = generate("cycle:4", 0)
    two = ListAssignment.from_lists([{1, 2}] * 4)
    assert all_flaws(c4, two, [1, 2, 1, 2], FlawParams(TF, 1)) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([TF, KR]), st.floats(0.5, 5))
def test_least_in_range_matches_exhaustive_filter(seed, variant, L):
    g = random_graph(14, 0.2, seed)
    lists = ListAssignment.uniform(g.n, 3, 5, seed)
    sigma = random_partial(g, lists, seed)
    p = FlawParams(variant, L, r=4 if variant is KR else None)
    flaws = all_flaws(g, lists, sigma, p)
    assert flaws == sorted(flaws)
    rb, rz = p.radii
    for v in range(g.n):
        cand = [f for f in flaws if f.vertex in g.ball_set(v, rb if f.kind == "B" else rz)]
        got = least_flaw_in_range(g, lists, sigma, v, p)
        assert got == (min(cand) if cand else None)
        if got is not None:
            assert flaw_holds(g, lists, sigma, got, p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_flaw_locality(seed):
    """B and Z_kr read only N_v; Z_tf reads distance two."""
    rng = random.Random(seed)
    g = random_graph(14, 0.2, seed)
    lists = ListAssignment.uniform(g.n, 3, 5, seed)
    sigma = random_partial(g, lists, seed)
    v = rng.randrange(g.n)
    tf, kr = FlawParams(TF, 2.5), FlawParams(KR, 2, r=4)
    before = (b_holds(g, lists, sigma, v, tf), z_holds_tf(g, lists, sigma, v, tf), z_holds_kr(g, lists, sigma, v, kr))
    far2 = list(sigma)
    far1 = list(sigma)
    for w in range(g.n):
        if w not in g.ball_set(v, 2):
            far2[w] = rng.choice([BLANK, *sorted(lists[w])])
        if w not in g.ball_set(v, 1) or w == v:
            far1[w] = rng.choice([BLANK, *sorted(lists[w])])
    assert z_holds_tf(g, lists, far2, v, tf) == before[1]
    assert b_holds(g, lists, far1, v, tf) == before[0]
    assert z_holds_kr(g, lists, far1, v, kr) == before[2]
