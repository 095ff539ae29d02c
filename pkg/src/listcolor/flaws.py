"""Flaw predicates for both variants, their total order, and in-range search.

These functions recompute everything from ``sigma`` and are the reference
semantics; :mod:`listcolor.engine` maintains the same predicates
incrementally for the repair procedures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

from .coloring import BLANK, Colour, ListAssignment, available_list, t_set
from .graph import Graph


class Variant(str, enum.Enum):
    TRIANGLE_FREE = "tf"
    CLIQUE_FREE = "kr"


class Flaw(NamedTuple):
    """``("B", v)`` or ``("Z", v)``.

    Tuple comparison gives the required order directly: every B flaw sorts
    before every Z flaw, ties broken by vertex label.
    """

    kind: str
    vertex: int

    def __str__(self) -> str:
        return f"{self.kind}_{self.vertex}"


def B(v: int) -> Flaw:
    return Flaw("B", v)


def Z(v: int) -> Flaw:
    return Flaw("Z", v)


@dataclass(frozen=True)
class FlawParams:
    variant: Variant
    L: float
    epsilon: float | None = None
    r: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.variant is Variant.CLIQUE_FREE and (self.r is None or self.r < 4):
            raise ValueError(f"clique-free variant needs r >= 4, got {self.r}")

    @property
    def radii(self) -> tuple[int, int]:
        """(B radius, Z radius) scanned by the repair loop."""
        return (2, 3) if self.variant is Variant.TRIANGLE_FREE else (3, 2)


def b_holds(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, params: FlawParams) -> bool:
    return len(available_list(g, lists, sigma, v)) < params.L


def z_sum(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int) -> int:
    """Sum over ``c`` in ``L_v`` of ``|T_{v,c}|`` (Blank contributes nothing)."""
    return sum(len(t_set(g, lists, sigma, v, c)) for c in available_list(g, lists, sigma, v))


def z_holds_tf(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, params: FlawParams) -> bool:
    lv = len(available_list(g, lists, sigma, v))
    return z_sum(g, lists, sigma, v) > params.L * lv / 10


def blank_neighbours(g: Graph, sigma: Sequence[Colour], v: int) -> int:
    return sum(1 for u in g.adj[v] if sigma[u] is BLANK)


def z_holds_kr(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, params: FlawParams) -> bool:
    return blank_neighbours(g, sigma, v) >= params.L


def flaw_holds(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], f: Flaw, params: FlawParams) -> bool:
    if f.kind == "B":
        return b_holds(g, lists, sigma, f.vertex, params)
    if params.variant is Variant.TRIANGLE_FREE:
        return z_holds_tf(g, lists, sigma, f.vertex, params)
    return z_holds_kr(g, lists, sigma, f.vertex, params)


def least_flaw_in_range(
    g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, params: FlawParams
) -> Optional[Flaw]:
    rb, rz = params.radii
    for w in g.ball(v, rb):
        if b_holds(g, lists, sigma, w, params):
            return B(w)
    for w in g.ball(v, rz):
        if flaw_holds(g, lists, sigma, Z(w), params):
            return Z(w)
    return None


def all_flaws(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], params: FlawParams) -> list[Flaw]:
    out = [B(v) for v in range(g.n) if b_holds(g, lists, sigma, v, params)]
    out += [Z(v) for v in range(g.n) if flaw_holds(g, lists, sigma, Z(v), params)]
    return out
