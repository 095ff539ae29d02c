import random
from collections import Counter

import pytest
from scipy.stats import chisquare

from listcolor.seeds import derive_seed, draw_product, mixed_radix, np_stream, stream


def test_mixed_radix_least_significant_first():
    assert mixed_radix(0, [3, 3]) == [0, 0]
    assert mixed_radix(5, [3, 3]) == [2, 1]
    assert mixed_radix(7, [2, 5]) == [1, 3]
    with pytest.raises(ValueError):
        mixed_radix(9, [3, 3])


def test_streams_are_independent_and_stable():
    a = derive_seed(7, "recolor", 0, 0)
    assert a == derive_seed(7, "recolor", 0, 0)
    assert a != derive_seed(7, "recolor", 0, 1)
    assert a != derive_seed(7, "lab")
    assert 0 <= a < 2**64
    assert stream(1, "x").random() == stream(1, "x").random()
    assert np_stream(1, "lab").integers(0, 10**9) == np_stream(1, "lab").integers(0, 10**9)


def test_draw_product_uses_one_draw():
    rng = random.Random(3)
    chosen, size = draw_product([["a", "b", "c"], [1, 2]], rng)
    x = random.Random(3).randrange(6)
    assert size == 6
    assert chosen == [["a", "b", "c"][x % 3], [1, 2][x // 3]]
    assert draw_product([], random.Random(0)) == ([], 1)


def test_draw_product_uniform_chi_square():
    rng = random.Random(11)
    counts = Counter()
    trials = 100_000
    for _ in range(trials):
        chosen, size = draw_product([[0, 1, 2], [0, 1, 2]], rng)
        counts[tuple(chosen)] += 1
    assert size == 9 and len(counts) == 9
    assert chisquare([counts[k] for k in sorted(counts)]).pvalue > 0.001
