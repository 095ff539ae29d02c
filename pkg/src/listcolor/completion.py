"""Completing a flaw-free partial colouring to a full proper list colouring."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .coloring import BLANK, Colour, ListAssignment, available_list
from .flaws import FlawParams, all_flaws
from .graph import Graph


class CompletionFailed(RuntimeError):
    pass


class FlawFreePreconditionViolated(CompletionFailed):
    pass


class IterationCapExceeded(CompletionFailed):
    pass


class GreedyStuck(CompletionFailed):
    def __init__(self, v: int):
        super().__init__(f"greedy completion found no admissible colour for vertex {v}")
        self.vertex = v


@dataclass(frozen=True, order=True)
class ConflictEvent:
    u: int
    v: int
    colour: int


def moser_tardos_complete(
    g: Graph,
    lists: ListAssignment,
    sigma: Sequence[Colour],
    flaw_params: FlawParams,
    rng: random.Random,
    cap: Optional[int] = None,
    check: bool = True,
) -> tuple[list, int]:
    """Colour the Blank vertices by resampling.

    Each Blank vertex draws uniformly from its non-Blank available colours,
    frozen at entry.  While two adjacent formerly-Blank vertices share a
    colour, the least such edge is redrawn at both ends.  Returns the
    colouring and the number of resampling rounds.
    """
    if check:
        bad = all_flaws(g, lists, sigma, flaw_params)
        if bad:
            raise FlawFreePreconditionViolated(f"input colouring has flaws, first {bad[0]}")
    out = list(sigma)
    blanks = [v for v in range(g.n) if out[v] is BLANK]
    if not blanks:
        return out, 0
    opts = {}
    for v in blanks:
        cs = sorted(c for c in available_list(g, lists, sigma, v) if c is not BLANK)
        if not cs:
            raise CompletionFailed(f"vertex {v} has no non-Blank colour available")
        opts[v] = cs
    blank_set = set(blanks)
    for v in blanks:
        out[v] = rng.choice(opts[v])

    def incident(v: int) -> list[tuple[int, int]]:
        return [(min(v, w), max(v, w)) for w in g.adj[v] if w in blank_set and out[w] == out[v]]

    violated = {e for v in blanks for e in incident(v)}
    if cap is None:
        cap = 100 * len(blanks)
    rounds = 0
    while violated:
        if rounds >= cap:
            raise IterationCapExceeded(
                f"{len(violated)} conflicts remain after {rounds} resampling rounds"
            )
        u, w = min(violated)
        for x in (u, w):
            for y in g.adj[x]:
                violated.discard((min(x, y), max(x, y)))
        out[u] = rng.choice(opts[u])
        out[w] = rng.choice(opts[w])
        violated.update(incident(u))
        violated.update(incident(w))
        rounds += 1
    return out, rounds


def greedy_complete(g: Graph, lists: ListAssignment, sigma: Sequence[Colour]) -> list:
    """Blank vertices in label order each take their least admissible colour."""
    out = list(sigma)
    for v in range(g.n):
        if out[v] is not BLANK:
            continue
        used = {out[u] for u in g.adj[v]}
        free = [c for c in lists[v] if c not in used]
        if not free:
            raise GreedyStuck(v)
        out[v] = min(free)
    return out


def conflict_events(g: Graph, lists: ListAssignment, sigma: Sequence[Colour]) -> list[ConflictEvent]:
    """All events ``A_{uv,c}`` for the resampling experiment on ``sigma``."""
    avail = {
        v: available_list(g, lists, sigma, v) - {BLANK}
        for v in range(g.n)
        if sigma[v] is BLANK
    }
    return [
        ConflictEvent(u, w, c)
        for u, w in g.edges()
        if u in avail and w in avail
        for c in sorted(avail[u] & avail[w])
    ]


def local_lemma_diagnostic(
    g: Graph, lists: ListAssignment, sigma: Sequence[Colour], L: float
) -> dict:
    """Non-blocking check of the local-lemma condition for the completion.

    ``pairwise_bound`` is the per-event quantity
    ``L(|L_u|+|L_v|) / (10(|L_u|-1)(|L_v|-1))``; ``exact_sum`` is the actual
    probability mass of the events sharing a vertex with the event.  Both
    should stay below 1/4.
    """
    size = {
        v: len(available_list(g, lists, sigma, v))
        for v in range(g.n)
        if sigma[v] is BLANK
    }
    events = conflict_events(g, lists, sigma)
    prob = {e: 1.0 / ((size[e.u] - 1) * (size[e.v] - 1)) for e in events}
    mass: dict[int, float] = {}
    edge_mass: dict[tuple[int, int], float] = {}
    for e, p in prob.items():
        mass[e.u] = mass.get(e.u, 0.0) + p
        mass[e.v] = mass.get(e.v, 0.0) + p
        edge_mass[e.u, e.v] = edge_mass.get((e.u, e.v), 0.0) + p
    worst_pairwise = 0.0
    worst_exact = 0.0
    for e, p in prob.items():
        lu, lv = size[e.u], size[e.v]
        worst_pairwise = max(worst_pairwise, L * (lu + lv) / (10 * (lu - 1) * (lv - 1)))
        worst_exact = max(worst_exact, mass[e.u] + mass[e.v] - edge_mass[e.u, e.v] - p)
    return {
        "events": len(events),
        "pairwise_bound": worst_pairwise,
        "exact_sum": worst_exact,
        "condition_holds": worst_pairwise < 0.25,
    }
