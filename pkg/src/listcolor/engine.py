"""Incrementally maintained colouring state for the repair procedures.

``ColoringState`` keeps, per vertex, the counts of colours on its
neighbourhood, the non-Blank part of ``L_v``, the number of Blank neighbours
and the set of currently holding flaws.  Each ``set_colour`` marks the
vertices whose flaws may have changed; ``refresh`` re-evaluates only those.
``check_consistency`` compares everything against :mod:`listcolor.flaws`.
"""

from __future__ import annotations

from collections import Counter
from typing import Optional, Sequence

from .coloring import BLANK, Colour, ListAssignment
from .flaws import Flaw, FlawParams, Variant, all_flaws
from .graph import Graph


class ColoringState:
    def __init__(self, g: Graph, lists: ListAssignment, sigma: Sequence[Colour], params: FlawParams):
        self.g = g
        self.lists = lists
        self.params = params
        self.tf = params.variant is Variant.TRIANGLE_FREE
        self.sigma: list[Colour] = list(sigma)
        adj = g.adj
        self.cnt: list[dict[int, int]] = []
        self.avail: list[set[int]] = []
        self.blank_nb: list[int] = []
        for v in range(g.n):
            c = Counter(self.sigma[u] for u in adj[v] if self.sigma[u] is not BLANK)
            self.cnt.append(dict(c))
            self.avail.append({x for x in lists[v] if x not in c})
            self.blank_nb.append(sum(1 for u in adj[v] if self.sigma[u] is BLANK))
        self.bflaws: set[int] = set()
        self.zflaws: set[int] = set()
        for v in range(g.n):
            self._eval(v, True, True)
        self._changed_avail: set[int] = set()
        self._blank_changed: set[int] = set()

    # -- predicates -------------------------------------------------------

    def list_size(self, v: int) -> int:
        return len(self.avail[v]) + 1

    def _b(self, v: int) -> bool:
        return len(self.avail[v]) + 1 < self.params.L

    def _z(self, v: int) -> bool:
        if not self.tf:
            return self.blank_nb[v] >= self.params.L
        av = self.avail[v]
        sigma, avail = self.sigma, self.avail
        s = 0
        for u in self.g.adj[v]:
            if sigma[u] is BLANK:
                s += len(av.intersection(avail[u]))
        return s > self.params.L * (len(av) + 1) / 10

    def _eval(self, v: int, b: bool, z: bool) -> None:
        if b:
            if self._b(v):
                self.bflaws.add(v)
            else:
                self.bflaws.discard(v)
        if z:
            if self._z(v):
                self.zflaws.add(v)
            else:
                self.zflaws.discard(v)

    def holds(self, f: Flaw) -> bool:
        return f.vertex in (self.bflaws if f.kind == "B" else self.zflaws)

    def flaw_count(self) -> int:
        return len(self.bflaws) + len(self.zflaws)

    def least_flaw(self) -> Optional[Flaw]:
        if self.bflaws:
            return Flaw("B", min(self.bflaws))
        if self.zflaws:
            return Flaw("Z", min(self.zflaws))
        return None

    def flaws(self) -> list[Flaw]:
        return [Flaw("B", v) for v in sorted(self.bflaws)] + [Flaw("Z", v) for v in sorted(self.zflaws)]

    def least_in_range(self, v: int) -> Optional[Flaw]:
        rb, rz = self.params.radii
        if self.bflaws:
            hit = self.bflaws & self.g.ball_set(v, rb)
            if hit:
                return Flaw("B", min(hit))
        if self.zflaws:
            hit = self.zflaws & self.g.ball_set(v, rz)
            if hit:
                return Flaw("Z", min(hit))
        return None

    def snapshot(self) -> tuple[frozenset[int], frozenset[int]]:
        return frozenset(self.bflaws), frozenset(self.zflaws)

    # -- mutation ---------------------------------------------------------

    def set_colour(self, u: int, c: Colour) -> None:
        old = self.sigma[u]
        if old == c:
            return
        self.sigma[u] = c
        lists = self.lists.lists
        for w in self.g.adj[u]:
            cw = self.cnt[w]
            if old is BLANK:
                self.blank_nb[w] -= 1
            else:
                k = cw[old] - 1
                if k:
                    cw[old] = k
                else:
                    del cw[old]
                    if old in lists[w]:
                        self.avail[w].add(old)
                        self._changed_avail.add(w)
            if c is BLANK:
                self.blank_nb[w] += 1
            else:
                k = cw.get(c, 0)
                cw[c] = k + 1
                if k == 0 and c in lists[w]:
                    self.avail[w].discard(c)
                    self._changed_avail.add(w)
        if (old is BLANK) != (c is BLANK):
            self._blank_changed.add(u)

    def refresh(self) -> None:
        adj = self.g.adj
        changed, blanks = self._changed_avail, self._blank_changed
        dirty_z: set[int] = set()
        for x in blanks:
            dirty_z.update(adj[x])
        if self.tf:
            dirty_z |= changed
            sigma = self.sigma
            for x in changed:
                if sigma[x] is BLANK:
                    dirty_z.update(adj[x])
        for v in changed:
            self._eval(v, True, v in dirty_z)
        for v in dirty_z - changed:
            self._eval(v, False, True)
        self._changed_avail = set()
        self._blank_changed = set()

    def assign(self, colours: dict[int, Colour]) -> None:
        for u, c in colours.items():
            self.set_colour(u, c)
        self.refresh()

    # -- list views -------------------------------------------------------

    def available(self, u: int) -> frozenset:
        return frozenset(self.avail[u]) | {BLANK}

    def external(self, v: int, u: int) -> frozenset:
        """``L*_u`` relative to ``v`` (colours on ``N_v`` are ignored)."""
        inside = self.g.nbr_sets[v]
        inner = Counter(
            self.sigma[w] for w in self.g.adj[u] if w in inside and self.sigma[w] is not BLANK
        )
        cu = self.lists[u]
        cnt = self.cnt[u]
        extra = {c for c, k in inner.items() if c in cu and cnt.get(c, 0) == k}
        return frozenset(self.avail[u] | extra) | {BLANK}

    # -- debugging --------------------------------------------------------

    def check_consistency(self) -> None:
        ref = all_flaws(self.g, self.lists, self.sigma, self.params)
        mine = self.flaws()
        if ref != mine:
            raise AssertionError(f"incremental flaws {mine} != recomputed {ref}")
