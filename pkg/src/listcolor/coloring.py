"""List assignments, partial colourings and the derived sets every flaw reads.

A partial colouring is a plain ``list`` indexed by vertex whose entries are
colour ids or :data:`BLANK`.  ``BLANK`` is never stored in a vertex list; it
is implicitly available everywhere.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .graph import Graph

BLANK = None

Colour = Optional[int]
PartialColoring = list  # list[Colour]


class ColoringError(ValueError):
    pass


@dataclass(frozen=True)
class ListAssignment:
    """Per-vertex colour lists over dense integer colour ids.

    ``names`` maps colour ids back to the labels they were ingested from, so
    files written later use the caller's colour names.
    """

    lists: tuple[frozenset[int], ...]
    q: int | None = None
    names: tuple[object, ...] | None = None

    def __post_init__(self) -> None:
        for v, lst in enumerate(self.lists):
            if BLANK in lst:
                raise ColoringError(f"vertex {v}: Blank may not appear in a colour list")

    @property
    def palette(self) -> frozenset[int]:
        return frozenset().union(*self.lists)

    def __len__(self) -> int:
        return len(self.lists)

    def __getitem__(self, v: int) -> frozenset[int]:
        return self.lists[v]

    def colour_name(self, c: Colour) -> object:
        if c is BLANK:
            return None
        return self.names[c] if self.names is not None else c

    @classmethod
    def from_lists(cls, lists: Iterable[Iterable[int]], q: int | None = None) -> "ListAssignment":
        return cls(tuple(frozenset(l) for l in lists), q)

    @classmethod
    def uniform(cls, n: int, q: int, palette_size: int, seed: int = 0) -> "ListAssignment":
        """Every vertex gets a ``q``-subset of ``0..palette_size-1``.

        When ``q == palette_size`` all lists are the full palette and the seed
        is irrelevant.
        """
        if q < 1 or q > palette_size:
            raise ColoringError(f"need 1 <= q <= palette size, got q={q}, palette={palette_size}")
        full = frozenset(range(palette_size))
        if q == palette_size:
            return cls(tuple(full for _ in range(n)), q)
        rng = random.Random(f"lists:{n}:{q}:{palette_size}:{seed}")
        pool = list(range(palette_size))
        return cls(tuple(frozenset(rng.sample(pool, q)) for _ in range(n)), q)

    @classmethod
    def from_named(cls, named: Mapping[int, Sequence[object]], n: int) -> "ListAssignment":
        """Ingest per-vertex lists with arbitrary colour labels."""
        missing = [v for v in range(n) if v not in named]
        if missing:
            raise ColoringError(f"no list for vertices {missing[:10]}")
        # labels are compared as text but written back in their original form
        original: dict[str, object] = {}
        for v in range(n):
            for c in named[v]:
                original.setdefault(str(c), c)
        labels = sorted(original, key=_label_key)
        ids = {c: i for i, c in enumerate(labels)}
        lists = tuple(frozenset(ids[str(c)] for c in named[v]) for v in range(n))
        sizes = {len(l) for l in lists}
        return cls(lists, sizes.pop() if len(sizes) == 1 else None, tuple(original[c] for c in labels))


def _label_key(label: str) -> tuple:
    # numeric labels sort numerically so "10" follows "9"
    try:
        return (0, int(label), label)
    except ValueError:
        return (1, 0, label)


def ordered(colours: Iterable[Colour]) -> list[Colour]:
    """Canonical order of a colour set: ids ascending, Blank last."""
    cs = list(colours)
    out = sorted(c for c in cs if c is not BLANK)
    if any(c is BLANK for c in cs):
        out.append(BLANK)
    return out


def init_blank(g: Graph, lists: ListAssignment) -> PartialColoring:
    if len(lists) != g.n:
        raise ColoringError(f"list assignment covers {len(lists)} vertices, graph has {g.n}")
    return [BLANK] * g.n


def available_list(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int) -> frozenset:
    """``L_v``: colours of ``C_v`` unused on ``N_v``, together with Blank."""
    used = {sigma[u] for u in g.adj[v]}
    return frozenset(c for c in lists[v] if c not in used) | {BLANK}


def t_set(
    g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, c: Colour
) -> frozenset[int]:
    """``T_{v,c}``: Blank neighbours of ``v`` that could still take ``c``."""
    if c is BLANK:
        return frozenset()
    return frozenset(
        u
        for u in g.adj[v]
        if sigma[u] is BLANK and c in lists[u] and all(sigma[w] != c for w in g.adj[u])
    )


def external_list(
    g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, u: int
) -> frozenset:
    """``L*_u`` relative to ``v``: colours of ``C_u`` unused on neighbours of
    ``u`` outside ``N_v``, together with Blank."""
    inside = g.nbr_sets[v]
    if u not in inside:
        raise ColoringError(f"vertex {u} is not a neighbour of {v}")
    used = {sigma[w] for w in g.adj[u] if w not in inside}
    return frozenset(c for c in lists[u] if c not in used) | {BLANK}


def is_partial_proper(g: Graph, lists: ListAssignment, sigma: Sequence[Colour]) -> bool:
    for v in range(g.n):
        c = sigma[v]
        if c is BLANK:
            continue
        if c not in lists[v]:
            return False
        if any(sigma[u] == c for u in g.adj[v]):
            return False
    return True


def is_proper_full(g: Graph, lists: ListAssignment, sigma: Sequence[Colour]) -> bool:
    return len(sigma) == g.n and all(c is not BLANK for c in sigma) and is_partial_proper(g, lists, sigma)


def conflicts(g: Graph, lists: ListAssignment, sigma: Sequence[Colour]) -> list[tuple]:
    """Human-readable reasons ``sigma`` is not a full proper list colouring."""
    out: list[tuple] = []
    for v in range(g.n):
        c = sigma[v]
        if c is BLANK:
            out.append(("blank", v))
        elif c not in lists[v]:
            out.append(("off-list", v, c))
    for u, w in g.edges():
        if sigma[u] is not BLANK and sigma[u] == sigma[w]:
            out.append(("monochromatic", u, w, sigma[u]))
    return out
