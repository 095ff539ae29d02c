"""Exact and Monte Carlo checks of the probabilistic and counting facts the
repair procedures rely on.

Every Monte Carlo estimate comes back as an :class:`EstimateReport`.  A
directional bound passes when the observed frequency is at most the bound
plus four standard errors; an exact comparison passes when the estimate is
within four standard errors of the exact value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Mapping, Optional, Sequence

import mpmath
import numpy as np

from . import seeds
from .coloring import BLANK
from .fix import BudgetExceeded, StepContext
from .flaws import FlawParams, Variant
from .graph import Graph, clique_number_at_most

SLACK_SE = 4.0


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    trials: int
    se: float
    bound: Optional[float]
    verdict: str  # "pass", "fail", "inconclusive" or "vacuous"
    label: str = ""
    exact: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "label": self.label,
            "estimate": self.estimate,
            "trials": self.trials,
            "se": self.se,
            "bound": self.bound,
            "exact": self.exact,
            "verdict": self.verdict,
        }
        d.update(self.extra)
        return d


def _bernoulli_report(hits: int, trials: int, bound: Optional[float], label: str, exact=None, extra=None) -> EstimateReport:
    p = hits / trials
    se = math.sqrt(p * (1 - p) / trials) if trials > 1 else 0.0
    if exact is not None:
        verdict = "pass" if abs(p - float(exact)) <= SLACK_SE * se + 1e-15 else "fail"
    elif bound is not None:
        verdict = "pass" if p <= bound + SLACK_SE * se else "fail"
    else:
        verdict = "inconclusive"
    return EstimateReport(p, trials, se, bound, verdict, label, None if exact is None else float(exact), extra or {})


# -- independent sets ------------------------------------------------------


def _masks(h: Graph) -> list[int]:
    return [sum(1 << u for u in h.adj[v]) for v in range(h.n)]


def count_independent_sets(h: Graph, max_vertices: int = 40) -> int:
    """``I(H)``, the number of independent sets including the empty one."""
    if h.n > max_vertices:
        raise BudgetExceeded(f"{h.n} vertices exceed the exact-count limit {max_vertices}")
    nb = _masks(h)

    @lru_cache(maxsize=None)
    def count(mask: int) -> int:
        if not mask:
            return 1
        # branch on the vertex with most neighbours left; isolated ones double the count
        best, best_deg = -1, -1
        m = mask
        while m:
            low = m & -m
            v = low.bit_length() - 1
            d = (nb[v] & mask).bit_count()
            if d > best_deg:
                best, best_deg = v, d
            m ^= low
        if best_deg == 0:
            return 1 << mask.bit_count()
        rest = mask & ~(1 << best)
        return count(rest) + count(rest & ~nb[best])

    return count((1 << h.n) - 1)


def independent_set_size_counts(h: Graph, max_vertices: int = 40) -> list[int]:
    """``out[k]`` is the number of independent sets of size ``k``."""
    if h.n > max_vertices:
        raise BudgetExceeded(f"{h.n} vertices exceed the exact-count limit {max_vertices}")
    nb = _masks(h)

    @lru_cache(maxsize=None)
    def poly(mask: int) -> tuple[int, ...]:
        if not mask:
            return (1,)
        low = mask & -mask
        v = low.bit_length() - 1
        rest = mask & ~low
        a = poly(rest)
        b = poly(rest & ~nb[v])
        out = list(a) + [0] * (len(b) + 1 - len(a))
        for k, x in enumerate(b):
            out[k + 1] += x
        return tuple(out)

    return list(poly((1 << h.n) - 1))


def shearer_bounds(h: Graph, r: int) -> tuple[int, int, mpmath.mpf]:
    """``(I(H), 2^|V(H)|, 2^(|V(H)|^(1/(r-1)) - 1))``."""
    n = h.n
    with mpmath.workdps(50):
        low = mpmath.power(2, mpmath.power(n, mpmath.mpf(1) / (r - 1)) - 1)
    return count_independent_sets(h), 1 << n, low


def check_shearer_count(h: Graph, r: int) -> bool:
    """Both counting bounds for a K_r-free graph."""
    if r < 2:
        raise ValueError("r must be at least 2")
    if not clique_number_at_most(h, r - 1):
        raise ValueError(f"graph contains K_{r}")
    count, upper, low = shearer_bounds(h, r)
    if count > upper:
        return False
    with mpmath.workdps(50):
        return mpmath.mpf(count) >= low


def median_independent_set_size(h: Graph) -> int:
    """Largest ``s`` such that at least half of all independent sets have size ``>= s``."""
    if h.n == 0:
        raise ValueError("graph has no vertices")
    counts = independent_set_size_counts(h)
    total = sum(counts)
    tail = 0
    for s in range(len(counts) - 1, -1, -1):
        tail += counts[s]
        if 2 * tail >= total:
            return s
    return 0


def lmu_threshold(i_h: int, r: int) -> Optional[mpmath.mpf]:
    """``log2 I / (2r log2 log2 I)``, or None when ``log2 I <= 1``."""
    with mpmath.workdps(50):
        lg = mpmath.log(i_h, 2)
        if lg <= 1:
            return None
        return lg / (2 * r * mpmath.log(lg, 2))


def check_lmu(h: Graph, r: int) -> Optional[bool]:
    """Whether the median independent-set size reaches the threshold; None
    when the threshold is undefined (``log2 I(H) <= 1``)."""
    if not clique_number_at_most(h, r - 1):
        raise ValueError(f"graph contains K_{r}")
    threshold = lmu_threshold(count_independent_sets(h), r)
    if threshold is None:
        return None
    with mpmath.workdps(50):
        return mpmath.mpf(median_independent_set_size(h)) >= threshold


# -- list model: rho and E|L_v| ------------------------------------------


def rho(lists: Sequence[frozenset], c: int) -> float:
    """``sum over lists containing c of 1/(|L_u|-1)``; lists include Blank."""
    if c is BLANK:
        raise ValueError("rho is defined for non-Blank colours")
    total = 0.0
    for l in lists:
        if BLANK not in l:
            raise ValueError("neighbour lists must contain Blank")
        if c in l:
            total += 1.0 / (len(l) - 1)
    return total


def sum_rho(lists: Sequence[frozenset]) -> float:
    colours = {c for l in lists for c in l if c is not BLANK}
    return math.fsum(rho(lists, c) for c in colours)


def expected_Lv(lists: Sequence[frozenset], cv: frozenset, exact: bool = False) -> float | Fraction:
    """``E|L_v|`` when each neighbour picks uniformly from its list."""
    one = Fraction(1) if exact else 1.0
    terms = []
    for c in sorted(cv):
        p = one
        for l in lists:
            if c in l:
                p *= 1 - one / len(l)
        terms.append(p)
    if exact:
        return 1 + sum(terms, Fraction(0))
    return 1.0 + math.fsum(terms)


def expected_Lv_lower_bounds(lists: Sequence[frozenset], cv: frozenset) -> dict:
    """The two lower bounds on ``E|L_v|``: the sum of ``exp(-rho(c))`` and
    ``q exp(-deg/q)`` with ``q = |C_v|``."""
    q = len(cv)
    deg = len(lists)
    return {
        "sum_exp_rho": math.fsum(math.exp(-rho(lists, c)) for c in cv),
        "convexity": q * math.exp(-deg / q) if q else 0.0,
    }


def _lv_distribution(lists: Sequence[frozenset], cv: frozenset) -> dict[int, int]:
    """Outcome counts keyed by the bitmask of ``C_v`` colours used on ``N_v``."""
    bit = {c: 1 << i for i, c in enumerate(sorted(cv))}
    dist = {0: 1}
    for l in lists:
        nxt: dict[int, int] = {}
        for mask, k in dist.items():
            for c in l:
                m = mask | bit.get(c, 0)
                nxt[m] = nxt.get(m, 0) + k
        dist = nxt
    return dist


def enumerated_expected_Lv(lists: Sequence[frozenset], cv: frozenset, budget: int = 10**6) -> Fraction:
    """``E|L_v|`` by walking every outcome of the neighbour draws."""
    size = math.prod(len(l) for l in lists)
    if size > budget:
        raise BudgetExceeded(f"{size} outcomes exceed budget {budget}")
    total = 0
    q = len(cv)
    for cols in product(*[sorted(l, key=lambda c: (c is BLANK, c or 0)) for l in lists]):
        total += 1 + q - len(cv.intersection(cols))
    return Fraction(total, size)


def _draw_used(lists: Sequence[frozenset], cv: frozenset, trials: int, rng: np.random.Generator, chunk: int = 10_000):
    """Yield boolean arrays ``used[t, j]``: colour ``j`` of sorted ``C_v`` appears on ``N_v`` in trial ``t``."""
    cvs = sorted(cv)
    index = {c: j for j, c in enumerate(cvs)}
    q = len(cvs)
    # each list becomes an array of column indices into C_v; colours outside C_v and Blank map to q
    cols = [np.array([index.get(c, q) for c in sorted(l, key=lambda c: (c is BLANK, c or 0))]) for l in lists]
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        used = np.zeros((m, q + 1), dtype=bool)
        rows = np.arange(m)
        for arr in cols:
            pick = arr[rng.integers(0, len(arr), size=m)]
            used[rows, pick] = True
        yield used[:, :q]
        done += m


def mc_Lv_sizes(lists: Sequence[frozenset], cv: frozenset, trials: int, seed: int) -> np.ndarray:
    rng = seeds.np_stream(seed, seeds.LAB, "lv")
    parts = [1 + len(cv) - used.sum(axis=1) for used in _draw_used(lists, cv, trials, rng)]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=int)


def mc_expected_Lv(lists: Sequence[frozenset], cv: frozenset, trials: int, seed: int) -> EstimateReport:
    sizes = mc_Lv_sizes(lists, cv, trials, seed)
    mean = float(sizes.mean())
    se = float(sizes.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    exact = expected_Lv(lists, cv)
    ok = abs(mean - exact) <= SLACK_SE * se + 1e-12 * abs(exact)
    return EstimateReport(mean, trials, se, None, "pass" if ok else "fail", "E|L_v|", exact)


def lv_lower_tail(lists: Sequence[frozenset], cv: frozenset, trials: int, seed: int) -> EstimateReport:
    """Frequency of ``|L_v| < E/2`` against ``exp(-E/8)``."""
    e = expected_Lv(lists, cv)
    sizes = mc_Lv_sizes(lists, cv, trials, seed)
    hits = int((sizes < e / 2).sum())
    return _bernoulli_report(hits, trials, math.exp(-e / 8), "Pr(|L_v| < E/2)", extra={"expectation": e})


# -- negative correlation -------------------------------------------------


def _superset_sums(weights: dict[int, int], k: int) -> list[int]:
    f = [0] * (1 << k)
    for m, w in weights.items():
        f[m] += w
    for i in range(k):
        b = 1 << i
        for m in range(1 << k):
            if not m & b:
                f[m] += f[m | b]
    return f


def negatively_correlated(weights: Mapping[int, int], k: int) -> bool:
    """Whether indicators ``bit i of the outcome`` are negatively correlated
    under the outcome weights: ``Pr(all of I) <= prod Pr(i)`` for every ``I``."""
    total = sum(weights.values())
    if total <= 0:
        raise ValueError("weights must have positive total")
    up = _superset_sums(dict(weights), k)
    single = [up[1 << i] for i in range(k)]
    for mask in range(1, 1 << k):
        members = [i for i in range(k) if mask >> i & 1]
        # up[mask] / total <= prod(single[i] / total)
        if up[mask] * total ** (len(members) - 1) > math.prod(single[i] for i in members):
            return False
    return True


def negative_correlation_exact(lists: Sequence[frozenset], cv: frozenset, max_colours: int = 20) -> bool:
    """The events ``c not in L_v`` (colour ``c`` used on ``N_v``) over
    ``C_v`` are negatively correlated, computed exactly."""
    k = len(cv)
    if k > max_colours:
        raise BudgetExceeded(f"{k} colours exceed the subset budget 2^{max_colours}")
    return negatively_correlated(_lv_distribution(lists, cv), k)


def urn_distribution() -> dict[int, int]:
    """Two copies of each even-weight string of length three, one copy of
    each odd-weight string; keys are bitmasks with bit ``i`` the ``i``-th digit."""
    return {m: 2 if bin(m).count("1") % 2 == 0 else 1 for m in range(8)}


def complement(weights: Mapping[int, int], k: int) -> dict[int, int]:
    full = (1 << k) - 1
    return {full ^ m: w for m, w in weights.items()}


def conjunction_probability(weights: Mapping[int, int], mask: int) -> Fraction:
    total = sum(weights.values())
    return Fraction(sum(w for m, w in weights.items() if m & mask == mask), total)


# -- flaw probabilities ---------------------------------------------------


def flaw_events(ctx: StepContext, colours: Sequence, params: FlawParams) -> tuple[bool, bool]:
    """``(B_v, Z_v)`` when the neighbours carry ``colours``; lists of the
    neighbours are held fixed as in ``ctx``."""
    used = set(colours)
    lv = {c for c in ctx.cv if c not in used}
    b = len(lv) + 1 < params.L
    if params.variant is Variant.CLIQUE_FREE:
        z = sum(1 for c in colours if c is BLANK) >= params.L
    else:
        s = sum(len(lv.intersection(l)) for l, c in zip(ctx.lists, colours) if c is BLANK)
        z = s > params.L * (len(lv) + 1) / 10
    return b, z


def exact_flaw_probability(ctx: StepContext, params: FlawParams, model: str = "independent", budget: int = 10**6) -> tuple[Fraction, Fraction]:
    """Exact ``(Pr B_v, Pr Z_v)`` by enumeration of the model's outcomes."""
    if model == "independent":
        size = ctx.product_size
        if size > budget:
            raise BudgetExceeded(f"{size} outcomes exceed budget {budget}")
        outcomes = product(*ctx.lists)
    elif model == "omega":
        from .fix2 import _iter_omega

        outcomes = list(_iter_omega(ctx, budget))
        size = len(outcomes)
    else:
        raise ValueError(f"unknown model {model!r}")
    nb = nz = 0
    for cols in outcomes:
        b, z = flaw_events(ctx, cols, params)
        nb += b
        nz += z
    return Fraction(nb, size), Fraction(nz, size)


def mc_flaw_probability(
    ctx: StepContext,
    params: FlawParams,
    trials: int,
    seed: int,
    model: str = "independent",
    exact_budget: int = 10**5,
) -> dict[str, EstimateReport]:
    """Monte Carlo frequencies of ``B_v`` and ``Z_v`` under the chosen
    recolouring model, with exact values (and an agreement verdict) when the
    outcome space is small enough."""
    if trials < 1000:
        raise ValueError("use at least 1000 trials")
    nb = nz = 0
    if model == "independent":
        rng = seeds.np_stream(seed, seeds.LAB, "flawprob")
        picks = [rng.integers(0, len(l), size=trials) for l in ctx.lists]
        for t in range(trials):
            cols = [l[p[t]] for l, p in zip(ctx.lists, picks)]
            b, z = flaw_events(ctx, cols, params)
            nb += b
            nz += z
    elif model == "omega":
        from .fix2 import PcaCounter

        counter = PcaCounter(ctx)
        rng = seeds.stream(seed, seeds.LAB, "flawprob-omega")
        for _ in range(trials):
            b, z = flaw_events(ctx, counter.sample(rng), params)
            nb += b
            nz += z
    else:
        raise ValueError(f"unknown model {model!r}")
    exact = (None, None)
    try:
        exact = exact_flaw_probability(ctx, params, model, exact_budget)
    except BudgetExceeded:
        pass
    deg = max(len(ctx.neighbours), 1)
    reported = float(deg) ** -4
    return {
        "B": _bernoulli_report(nb, trials, None, "B", exact[0], {"reported_bound": reported}),
        "Z": _bernoulli_report(nz, trials, None, "Z", exact[1], {"reported_bound": reported}),
    }


# -- concentration --------------------------------------------------------


@dataclass(frozen=True)
class Family:
    """Indicator families for the concentration checks.

    ``kind`` is ``"bernoulli"`` (``ps`` success probabilities),
    ``"lists"`` (``X_c = [c in L_v]`` for a list fixture) or
    ``"urn"`` (``m`` draws without replacement from ``N`` balls, ``K`` marked).
    """

    kind: str
    ps: tuple[float, ...] = ()
    lists: tuple[frozenset, ...] = ()
    cv: frozenset = frozenset()
    N: int = 0
    K: int = 0
    m: int = 0

    def mean(self) -> float:
        if self.kind == "bernoulli":
            return math.fsum(self.ps)
        if self.kind == "lists":
            return expected_Lv(self.lists, self.cv) - 1.0
        if self.kind == "urn":
            return self.m * self.K / self.N if self.N else 0.0
        raise ValueError(f"unknown family {self.kind!r}")

    def sample(self, trials: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "bernoulli":
            if not self.ps:
                return np.zeros(trials)
            return (rng.random((trials, len(self.ps))) < np.array(self.ps)).sum(axis=1)
        if self.kind == "lists":
            return np.concatenate([(~used).sum(axis=1) for used in _draw_used(self.lists, self.cv, trials, rng)])
        if self.kind == "urn":
            return rng.hypergeometric(self.K, self.N - self.K, self.m, size=trials) if self.m else np.zeros(trials)
        raise ValueError(f"unknown family {self.kind!r}")

    def tails(self) -> tuple[str, ...]:
        # for the list family only the lower tail is backed by negative
        # correlation of the complements; the upper tail is not claimed
        return ("lower",) if self.kind == "lists" else ("lower", "upper")


def chernoff_validator(family: Family, t: float, trials: int, seed: int, tail: str = "lower") -> EstimateReport:
    """Tail frequency of ``X = sum of the family's indicators`` against
    ``exp(-t^2/2E)`` (lower) or ``exp(-t^2/3E)`` (upper)."""
    if tail not in family.tails():
        raise ValueError(f"{tail} tail is not checked for the {family.kind} family")
    e = family.mean()
    label = f"{family.kind}:{tail}:t={t:g}"
    if e <= 0:
        return EstimateReport(0.0, 0, 0.0, None, "vacuous", label)
    rng = seeds.np_stream(seed, seeds.LAB, "chernoff", family.kind, tail, repr(t))
    x = family.sample(trials, rng)
    if tail == "lower":
        hits = int((x < e - t).sum())
        bound = math.exp(-t * t / (2 * e))
    else:
        hits = int((x > e + t).sum())
        bound = math.exp(-t * t / (3 * e))
    return _bernoulli_report(hits, trials, bound, label, extra={"expectation": e, "t": t})


def chernoff_grid(family: Family, trials: int, seed: int, fractions: Sequence[float] = (0.25, 0.5, 1.0)) -> list[EstimateReport]:
    e = family.mean()
    return [chernoff_validator(family, f * e, trials, seed, tail) for tail in family.tails() for f in fractions]


# -- fixtures --------------------------------------------------------------


def random_list_fixture(
    degree: int, q: int, palette: int, list_size: int, seed: int, blank_prob: float = 0.0
) -> tuple[tuple[frozenset, ...], frozenset]:
    """Neighbour lists (each with Blank) and ``C_v`` drawn from ``0..palette-1``.

    Each neighbour list holds ``list_size`` non-Blank colours, mimicking the
    lists seen at a recolouring step.
    """
    rng = seeds.np_stream(seed, seeds.LISTS, degree, q, palette, list_size)
    cv = frozenset(int(c) for c in rng.choice(palette, size=q, replace=False))
    lists = tuple(
        frozenset(int(c) for c in rng.choice(palette, size=list_size, replace=False)) | {BLANK}
        for _ in range(degree)
    )
    return lists, cv


def list_context(lists: Sequence[frozenset], cv: frozenset, inner_edges: Sequence[tuple[int, int]] = ()) -> StepContext:
    """Step context for the probability lab: a virtual vertex whose
    neighbours ``0..k-1`` carry ``lists``."""
    ordered_lists = tuple(tuple(sorted((c for c in l if c is not BLANK))) + (BLANK,) for l in lists)
    return StepContext(-1, tuple(range(len(lists))), ordered_lists, frozenset(cv), tuple(inner_edges))
