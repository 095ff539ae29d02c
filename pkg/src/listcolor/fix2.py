"""Neighbourhood repair for K_r-free graphs.

Here ``N_v`` may contain edges, so a neighbourhood is recoloured by a uniform
*partial colour assignment*: disjoint independent sets of ``N_v``, one per
colour, where ``u`` may join the class of colour ``i`` only if ``i`` is in
``L*_u`` (its list minus colours seen outside ``N_v``).  Vertices in no
class are Blank.

Uniform sampling is exact.  :class:`PcaCounter` counts assignments colour by
colour over subsets of ``N_v`` and samples by walking the counts backwards;
:func:`enumerate_pca` lists them outright for small cases.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Optional, Sequence

from . import seeds
from .coloring import BLANK, Colour, ListAssignment
from .completion import GreedyStuck, greedy_complete, moser_tardos_complete
from .engine import ColoringState
from .fix import (
    BudgetExceeded,
    FixParams,
    InvariantViolation,
    RunResult,
    RunStats,
    StepContext,
    Transcript,
    _state_context,
    complete_with_restarts,
    run_fix,
    step_context,
)
from .flaws import Flaw, Variant
from .graph import Graph, clique_number_at_most


@dataclass(frozen=True)
class PartialColourAssignment:
    """Colour classes on ``N_v``; ``classes`` holds ``(colour, members)``
    pairs sorted by colour with empty classes omitted."""

    anchor: int
    classes: tuple[tuple[int, frozenset[int]], ...]

    @classmethod
    def from_colours(cls, anchor: int, nbrs: Sequence[int], colours: Sequence[Colour]) -> "PartialColourAssignment":
        groups: dict[int, set[int]] = {}
        for u, c in zip(nbrs, colours):
            if c is not BLANK:
                groups.setdefault(c, set()).add(u)
        return cls(anchor, tuple((c, frozenset(groups[c])) for c in sorted(groups)))

    def colour_of(self, u: int) -> Colour:
        for c, members in self.classes:
            if u in members:
                return c
        return BLANK

    def colours(self, nbrs: Sequence[int]) -> tuple:
        lookup = {u: c for c, members in self.classes for u in members}
        return tuple(lookup.get(u, BLANK) for u in nbrs)

    def members(self, c: int) -> frozenset[int]:
        for col, m in self.classes:
            if col == c:
                return m
        return frozenset()

    def replace(self, c: int, members: frozenset[int]) -> "PartialColourAssignment":
        rest = [(col, m) for col, m in self.classes if col != c]
        if members:
            rest.append((c, frozenset(members)))
        return PartialColourAssignment(self.anchor, tuple(sorted(rest, key=lambda t: t[0])))


def omega_context(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int) -> StepContext:
    return step_context(g, lists, sigma, v, Variant.CLIQUE_FREE)


def validate_pca(ctx: StepContext, w: PartialColourAssignment) -> None:
    """Raise unless ``w`` is a partial colour assignment for ``ctx``."""
    pos = {u: i for i, u in enumerate(ctx.neighbours)}
    seen: set[int] = set()
    for c, members in w.classes:
        if c is BLANK:
            raise InvariantViolation("Blank used as a colour class")
        if not members:
            raise InvariantViolation(f"empty class for colour {c} stored explicitly")
        if seen & members:
            raise InvariantViolation("colour classes overlap")
        seen |= members
        for u in members:
            if u not in pos:
                raise InvariantViolation(f"vertex {u} outside N_{ctx.vertex}")
            if c not in ctx.lists[pos[u]]:
                raise InvariantViolation(f"colour {c} not admissible for vertex {u}")
    colours = w.colours(ctx.neighbours)
    for a, b in ctx.inner_edges:
        if colours[a] is not BLANK and colours[a] == colours[b]:
            raise InvariantViolation(
                f"class {colours[a]} is not independent: edge {ctx.neighbours[a]}-{ctx.neighbours[b]}"
            )


def _iter_omega(ctx: StepContext, budget: int) -> Iterator[tuple]:
    if ctx.product_size > budget:
        raise BudgetExceeded(f"{ctx.product_size} candidate assignments exceed budget {budget}")
    for cols in product(*ctx.lists):
        if all(cols[a] is BLANK or cols[a] != cols[b] for a, b in ctx.inner_edges):
            yield cols


def enumerate_pca(
    g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, budget: int = 100_000
) -> list[PartialColourAssignment]:
    """Every partial colour assignment to ``N_v``, in canonical order
    (neighbours ascending, colours ascending, Blank last)."""
    ctx = omega_context(g, lists, sigma, v)
    return [PartialColourAssignment.from_colours(v, ctx.neighbours, c) for c in _iter_omega(ctx, budget)]


# -- exact counting and sampling -----------------------------------------


class PcaCounter:
    """Counts partial colour assignments by processing one colour at a time.

    ``layers[i][mask]`` is the number of ways to choose disjoint independent
    classes for the first ``i`` colours covering exactly the neighbours in
    ``mask``.  The total over the last layer is ``|Omega|``.
    """

    def __init__(self, ctx: StepContext, budget: int = 5_000_000):
        self.ctx = ctx
        k = len(ctx.neighbours)
        self.k = k
        adj = [0] * k
        for a, b in ctx.inner_edges:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        self.adj = adj
        colours = sorted({c for l in ctx.lists for c in l if c is not BLANK})
        self.colours = colours
        self.allowed = [
            sum(1 << i for i, l in enumerate(ctx.lists) if c in l) for c in colours
        ]
        if len(colours) * (1 << k) > budget:
            raise BudgetExceeded(f"{len(colours)} colours on {k} neighbours exceed the counting budget")
        self._subsets = lru_cache(maxsize=None)(self._independent_subsets)
        layers = [{0: 1}]
        for allowed in self.allowed:
            prev = layers[-1]
            nxt: dict[int, int] = {}
            for mask, cnt in prev.items():
                for s in self._subsets(allowed & ~mask):
                    m = mask | s
                    nxt[m] = nxt.get(m, 0) + cnt
            layers.append(nxt)
        self.layers = layers
        self.total = sum(layers[-1].values())

    def _independent_subsets(self, mask: int) -> tuple[int, ...]:
        if not mask:
            return (0,)
        low = mask & -mask
        i = low.bit_length() - 1
        without = self._subsets(mask & ~low)
        with_ = tuple(low | s for s in self._subsets(mask & ~low & ~self.adj[i]))
        return without + with_

    def sample(self, rng: random.Random) -> tuple:
        """A uniform member of Omega as a colour tuple aligned with ``N_v``."""
        mask = _weighted(rng, self.layers[-1])
        colours: list = [BLANK] * self.k
        for idx in range(len(self.colours) - 1, -1, -1):
            prev = self.layers[idx]
            options = {}
            for s in self._subsets(mask & self.allowed[idx]):
                w = prev.get(mask & ~s, 0)
                if w:
                    options[s] = w
            s = _weighted(rng, options)
            for i in range(self.k):
                if s >> i & 1:
                    colours[i] = self.colours[idx]
            mask &= ~s
        return tuple(colours)


def _weighted(rng: random.Random, weights: dict[int, int]) -> int:
    keys = sorted(weights)
    x = rng.randrange(sum(weights[k] for k in keys))
    for k in keys:
        x -= weights[k]
        if x < 0:
            return k
    raise AssertionError("unreachable")


def count_pca(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int) -> int:
    return PcaCounter(omega_context(g, lists, sigma, v)).total


def sample_pca_uniform(
    g: Graph,
    lists: ListAssignment,
    sigma: Sequence[Colour],
    v: int,
    rng: random.Random,
    budget: int = 100_000,
) -> PartialColourAssignment:
    """A uniform member of Omega.

    Within ``budget`` this is ``Omega[rng.randrange(|Omega|)]`` over the
    canonical enumeration; larger neighbourhoods go through the exact
    counter instead, which is uniform as well.
    """
    ctx = omega_context(g, lists, sigma, v)
    if ctx.product_size <= budget:
        members = list(_iter_omega(ctx, budget))
        cols = members[rng.randrange(len(members))]
    else:
        cols = PcaCounter(ctx).sample(rng)
    w = PartialColourAssignment.from_colours(v, ctx.neighbours, cols)
    validate_pca(ctx, w)
    return w


# -- per-colour resampling -----------------------------------------------


def _class_candidates(ctx: StepContext, w: PartialColourAssignment, c: int) -> list[int]:
    """``Q_c``: the class of ``c`` together with the Blank vertices that may take ``c``."""
    current = w.colours(ctx.neighbours)
    return [
        u
        for u, l, col in zip(ctx.neighbours, ctx.lists, current)
        if col == c or (col is BLANK and c in l)
    ]


def independent_subsets(g: Graph, vertices: Sequence[int]) -> list[frozenset[int]]:
    """All independent sets of the subgraph induced on ``vertices``, including the empty set."""
    vs = list(vertices)
    out: list[frozenset[int]] = []

    def grow(i: int, chosen: list[int]) -> None:
        if i == len(vs):
            out.append(frozenset(chosen))
            return
        grow(i + 1, chosen)
        x = vs[i]
        if all(not g.has_edge(x, y) for y in chosen):
            chosen.append(x)
            grow(i + 1, chosen)
            chosen.pop()

    grow(0, [])
    return out


def resample_color_class(
    g: Graph,
    lists: ListAssignment,
    sigma: Sequence[Colour],
    v: int,
    w: PartialColourAssignment,
    c: int,
    rng: random.Random,
) -> PartialColourAssignment:
    """Replace the class of ``c`` by a uniform independent subset of ``Q_c``."""
    if c not in lists.palette:
        raise ValueError(f"colour {c} is not in the palette")
    ctx = omega_context(g, lists, sigma, v)
    options = independent_subsets(g, _class_candidates(ctx, w, c))
    out = w.replace(c, options[rng.randrange(len(options))])
    validate_pca(ctx, out)
    return out


def resample_kernel(ctx: StepContext, members: Sequence[PartialColourAssignment], c: int) -> list[list[Fraction]]:
    """Exact transition matrix of :func:`resample_color_class` on ``members``
    (which must be all of Omega, in some fixed order)."""
    index = {m: i for i, m in enumerate(members)}
    g_inner = _inner_graph(ctx)
    size = len(members)
    out = [[Fraction(0)] * size for _ in range(size)]
    for i, w in enumerate(members):
        cand = _class_candidates(ctx, w, c)
        local = [ctx.neighbours.index(u) for u in cand]
        subsets = independent_subsets(g_inner, local)
        p = Fraction(1, len(subsets))
        for s in subsets:
            nxt = w.replace(c, frozenset(ctx.neighbours[j] for j in s))
            out[i][index[nxt]] += p
    return out


def _inner_graph(ctx: StepContext) -> Graph:
    from .graph import build_graph

    return build_graph(len(ctx.neighbours), ctx.inner_edges)


# -- the injection of the blank-neighbour bound --------------------------


def _free_colours(ctx: StepContext, colours: Sequence[Colour], i: int, inner: Graph) -> list[int]:
    used = {colours[j] for j in inner.adj[i]}
    return [c for c in ctx.lists[i] if c is not BLANK and c not in used]


def blank_set_members(
    ctx: StepContext, members: Sequence[PartialColourAssignment], blanks: Sequence[int], k: int
) -> list[PartialColourAssignment]:
    """``Omega_B``: assignments where every vertex of ``blanks`` is Blank and
    has more than ``k`` available colours (Blank included)."""
    inner = _inner_graph(ctx)
    pos = [ctx.neighbours.index(u) for u in blanks]
    out = []
    for w in members:
        cols = w.colours(ctx.neighbours)
        if all(cols[i] is BLANK and len(_free_colours(ctx, cols, i, inner)) + 1 > k for i in pos):
            out.append(w)
    return out


def extensions(ctx: StepContext, w: PartialColourAssignment, blanks: Sequence[int]) -> Iterator[PartialColourAssignment]:
    """Every way of colouring ``blanks`` in turn with a colour unused on its
    neighbours inside ``N_v``."""
    inner = _inner_graph(ctx)
    pos = [ctx.neighbours.index(u) for u in blanks]

    def go(j: int, cols: list) -> Iterator[tuple]:
        if j == len(pos):
            yield tuple(cols)
            return
        i = pos[j]
        for c in _free_colours(ctx, cols, i, inner):
            cols[i] = c
            yield from go(j + 1, cols)
        cols[i] = BLANK

    for cols in go(0, list(w.colours(ctx.neighbours))):
        yield PartialColourAssignment.from_colours(ctx.vertex, ctx.neighbours, cols)


def extend_blank_assignment(
    g: Graph,
    lists: ListAssignment,
    sigma: Sequence[Colour],
    v: int,
    w: PartialColourAssignment,
    blanks: Sequence[int],
    rng: Optional[random.Random] = None,
) -> PartialColourAssignment:
    """Give each of ``blanks`` (in order) a colour from its external list
    that is unused on its neighbours inside ``N_v``; least colour unless an
    ``rng`` is supplied."""
    ctx = omega_context(g, lists, sigma, v)
    validate_pca(ctx, w)
    inner = _inner_graph(ctx)
    cols = list(w.colours(ctx.neighbours))
    k = len(blanks)
    for u in blanks:
        i = ctx.neighbours.index(u)
        if cols[i] is not BLANK:
            raise ValueError(f"vertex {u} is not Blank in the assignment")
        if len(_free_colours(ctx, cols, i, inner)) < k:
            raise ValueError(f"vertex {u} has fewer than {k} admissible colours")
    for u in blanks:
        i = ctx.neighbours.index(u)
        free = _free_colours(ctx, cols, i, inner)
        if not free:
            raise ValueError(f"vertex {u} has no admissible colour left")
        cols[i] = free[rng.randrange(len(free))] if rng is not None else free[0]
    out = PartialColourAssignment.from_colours(v, ctx.neighbours, cols)
    validate_pca(ctx, out)
    return out


def erase(w: PartialColourAssignment, blanks: Sequence[int]) -> PartialColourAssignment:
    drop = set(blanks)
    return PartialColourAssignment(
        w.anchor, tuple((c, m - drop) for c, m in w.classes if m - drop)
    )


# -- repair and pipeline --------------------------------------------------


def _recolor_kr(state: ColoringState, v: int, rng: random.Random) -> tuple[dict[int, Colour], int]:
    ctx = _state_context(state, v)
    counter = PcaCounter(ctx)
    cols = counter.sample(rng)
    return dict(zip(ctx.neighbours, cols)), counter.total


def fix2(
    g: Graph,
    lists: ListAssignment,
    sigma: Sequence[Colour],
    f: Flaw,
    params: FixParams,
    rng: Optional[random.Random] = None,
    stats: Optional[RunStats] = None,
    trace: Optional[list] = None,
) -> tuple[list, Transcript, RunStats]:
    """Repair one flaw of a K_r-free instance; returns (colouring, transcript, stats)."""
    fp = params.flaw_params
    if fp.variant is not Variant.CLIQUE_FREE:
        raise ValueError("fix2() needs clique-free flaw parameters")
    state = ColoringState(g, lists, sigma, fp)
    stats = stats if stats is not None else RunStats()
    rng = rng if rng is not None else seeds.stream(params.seed, seeds.RECOLOR, 0, 0)
    transcript = run_fix(state, f, params, rng, stats, _recolor_kr, trace)
    return state.sigma, transcript, stats


def run_pipeline_kr(g: Graph, lists: ListAssignment, params: FixParams) -> RunResult:
    """Blank start, repair to flaw-freedom, greedy completion (resampling
    completion if greedy gets stuck)."""
    fp = params.flaw_params
    if fp.variant is not Variant.CLIQUE_FREE:
        raise ValueError("run_pipeline_kr needs clique-free flaw parameters")
    if not clique_number_at_most(g, fp.r - 1):
        raise InvariantViolation(f"graph contains K_{fp.r}")

    def complete(sigma: list, stats: RunStats, rng: random.Random) -> list:
        try:
            full = greedy_complete(g, lists, sigma)
            stats.completion = "greedy"
        except GreedyStuck:
            full, stats.completion_iterations = moser_tardos_complete(
                g, lists, sigma, fp, rng, cap=params.completion_cap
            )
            stats.completion = "moser-tardos"
        return full

    return complete_with_restarts(g, lists, params, _recolor_kr, complete)
