import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_independent_sets, random_graph
from listcolor.analytics import (
    Family,
    chernoff_grid,
    chernoff_validator,
    check_lmu,
    check_shearer_count,
    complement,
    conjunction_probability,
    count_independent_sets,
    enumerated_expected_Lv,
    exact_flaw_probability,
    expected_Lv,
    expected_Lv_lower_bounds,
    independent_set_size_counts,
    list_context,
    lmu_threshold,
    lv_lower_tail,
    mc_expected_Lv,
    mc_flaw_probability,
    median_independent_set_size,
    negative_correlation_exact,
    negatively_correlated,
    random_list_fixture,
    rho,
    shearer_bounds,
    sum_rho,
    urn_distribution,
)
from listcolor.coloring import BLANK
from listcolor.flaws import FlawParams, Variant
from listcolor.graph import build_graph, generate


# -- independent sets ---------------------------------------------------------


def test_independent_set_examples():
    assert count_independent_sets(build_graph(3, [])) == 8
    assert count_independent_sets(generate("path:3", 0)) == 5
    assert count_independent_sets(generate("cycle:5", 0)) == 11
    assert independent_set_size_counts(generate("cycle:5", 0)) == [1, 5, 5]
    assert count_independent_sets(build_graph(0, [])) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 12), st.floats(0, 1), st.integers(0, 10**6))
def test_count_matches_subset_oracle(n, p, seed):
    g = random_graph(n, p, seed)
    assert count_independent_sets(g) == brute_independent_sets(g)
    edges = list(g.edges())
    by_size = [0] * (n + 1)
    for mask in range(1 << n):
        if all(not (mask >> u & 1 and mask >> v & 1) for u, v in edges):
            by_size[bin(mask).count("1")] += 1
    sizes = independent_set_size_counts(g)
    assert sizes == by_size[: len(sizes)] and sum(by_size[len(sizes):]) == 0


def test_count_on_larger_graph():
    g = random_graph(20, 0.2, 5)
    assert count_independent_sets(g) == brute_independent_sets(g)


def test_shearer_examples():
    assert check_shearer_count(build_graph(1, []), 2)
    i, up, low = shearer_bounds(generate("cycle:5", 0), 3)
    assert (i, up) == (11, 32)
    assert float(low) == pytest.approx(2 ** (math.sqrt(5) - 1))
    assert check_shearer_count(generate("cycle:5", 0), 3)
    with pytest.raises(ValueError):
        check_shearer_count(build_graph(3, [(0, 1), (1, 2), (0, 2)]), 3)


def test_median_examples():
    assert median_independent_set_size(build_graph(1, [])) == 1
    assert median_independent_set_size(generate("cycle:5", 0)) == 1
    with pytest.raises(ValueError):
        median_independent_set_size(build_graph(0, []))


def test_lmu_threshold():
    assert lmu_threshold(2, 4) is None
    with mpmath.workdps(30):
        lg = mpmath.log(100, 2)
        want = lg / (8 * mpmath.log(lg, 2))
    assert float(lmu_threshold(100, 4)) == pytest.approx(float(want))
    assert check_lmu(build_graph(1, []), 4) is None
    assert check_lmu(generate("cycle:5", 0), 4) is True


# -- rho and E|L_v| -----------------------------------------------------------


def test_rho_examples():
    lists = [frozenset({1, 2, BLANK}), frozenset({1, 3, BLANK})]
    assert rho(lists, 9) == 0
    assert rho(lists, 1) == 1
    with pytest.raises(ValueError):
        rho([frozenset({1})], 1)


def test_sum_rho_at_most_degree():
    for seed in range(30):
        lists, cv = random_list_fixture(12, 6, 15, 4, seed)
        assert sum_rho(lists) <= len(lists) + 1e-12


def test_expected_Lv_examples():
    assert expected_Lv([], frozenset({1, 2, 3})) == 4
    assert expected_Lv([frozenset({5, BLANK})], frozenset({5})) == 1.5
    assert expected_Lv([frozenset({5, BLANK})], frozenset({5}), exact=True) == Fraction(3, 2)


def test_expected_Lv_matches_enumeration():
    for seed in range(40):
        lists, cv = random_list_fixture(5, 4, 8, 3, seed)
        exact = expected_Lv(lists, cv, exact=True)
        assert enumerated_expected_Lv(lists, cv) == exact
        assert abs(expected_Lv(lists, cv) - float(exact)) <= 1e-12 * float(exact)
        b = expected_Lv_lower_bounds(lists, cv)
        # 1 - 1/k >= exp(-1/(k-1)) termwise, then Jensen with sum_rho <= deg
        assert float(exact) - 1 >= b["sum_exp_rho"] - 1e-12
        assert b["sum_exp_rho"] >= b["convexity"] - 1e-12


def test_expected_Lv_monte_carlo():
    lists, cv = random_list_fixture(50, 25, 60, 10, 1)
    rep = mc_expected_Lv(lists, cv, 20_000, 3)
    assert rep.verdict == "pass"


def test_lower_tail_is_below_bound():
    lists, cv = random_list_fixture(60, 40, 60, 20, 2)
    rep = lv_lower_tail(lists, cv, 10_000, 4)
    assert rep.verdict == "pass"
    assert rep.bound == pytest.approx(math.exp(-rep.extra["expectation"] / 8))


# -- negative correlation --------------------------------------------------------


def brute_negcorr(lists, cv):
    outcomes = list(itertools.product(*lists))
    cvs = sorted(cv)
    used = [{c for c in o if c in cv} for o in outcomes]
    n = len(outcomes)
    for r in range(2, len(cvs) + 1):
        for sub in itertools.combinations(cvs, r):
            joint = Fraction(sum(all(c in u for c in sub) for u in used), n)
            prod = math.prod(Fraction(sum(c in u for u in used), n) for c in sub)
            if joint > prod:
                return False
    return True


def test_negative_correlation_examples():
    lists = [frozenset({1, 2, BLANK}), frozenset({1, 2, BLANK}), frozenset({2, 3, BLANK})]
    assert negative_correlation_exact(lists, frozenset({1, 2}))
    assert negative_correlation_exact(lists, frozenset({2}))
    for seed in range(25):
        lists, cv = random_list_fixture(4, 4, 6, 2, seed)
        assert negative_correlation_exact(lists, cv) == brute_negcorr(lists, cv) is True


def test_urn():
    w = urn_distribution()
    y = complement(w, 3)
    assert conjunction_probability(y, 0b111) == Fraction(1, 6)
    assert all(conjunction_probability(y, 1 << i) == Fraction(1, 2) for i in range(3))
    assert Fraction(1, 6) > Fraction(1, 8)
    assert negatively_correlated(w, 3)
    assert not negatively_correlated(y, 3)


# -- flaw probabilities ---------------------------------------------------------


def test_flaw_probability_small_L_never_b():
    lists, cv = random_list_fixture(4, 3, 6, 2, 0)
    ctx = list_context(lists, cv)
    pb, _ = exact_flaw_probability(ctx, FlawParams(Variant.TRIANGLE_FREE, 1))
    assert pb == 0


@pytest.mark.parametrize("model", ["independent", "omega"])
def test_mc_flaw_probability_agrees_with_exact(model):
    lists, cv = random_list_fixture(5, 4, 7, 3, 8)
    ctx = list_context(lists, cv, [(0, 1), (2, 3)] if model == "omega" else ())
    fp = FlawParams(Variant.TRIANGLE_FREE, 3) if model == "independent" else FlawParams(Variant.CLIQUE_FREE, 3, r=4)
    out = mc_flaw_probability(ctx, fp, 20_000, 1, model)
    for key in "BZ":
        assert out[key].exact is not None
        assert out[key].verdict == "pass"
        assert out[key].extra["reported_bound"] == 5.0 ** -4
    with pytest.raises(ValueError):
        mc_flaw_probability(ctx, fp, 10, 1, model)


# -- concentration -----------------------------------------------------------------


def test_chernoff_fair_coins():
    fam = Family("bernoulli", ps=(0.5,) * 100)
    rep = chernoff_validator(fam, 25, 20_000, 0)
    assert rep.bound == pytest.approx(math.exp(-625 / 100))
    assert rep.verdict == "pass"
    assert all(r.verdict == "pass" for r in chernoff_grid(fam, 5000, 1))


def test_chernoff_vacuous():
    rep = chernoff_validator(Family("bernoulli", ps=()), 1, 100, 0)
    assert rep.verdict == "vacuous"


def test_chernoff_lists_and_urn():
    lists, cv = random_list_fixture(30, 20, 40, 10, 3)
    fam = Family("lists", lists=lists, cv=cv)
    assert fam.tails() == ("lower",)
    assert all(r.verdict == "pass" for r in chernoff_grid(fam, 5000, 2))
    with pytest.raises(ValueError):
        chernoff_validator(fam, 1, 100, 0, tail="upper")
    urn = Family("urn", N=50, K=20, m=25)
    assert urn.mean() == 10
    assert all(r.verdict == "pass" for r in chernoff_grid(urn, 5000, 3))
    sample = urn.sample(1000, np.random.default_rng(0))
    assert sample.min() >= 0 and sample.max() <= 20
