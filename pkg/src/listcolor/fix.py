"""The recursive neighbourhood-recolouring repair procedure for triangle-free
graphs, its write-ahead transcript, the full colouring pipeline and exact
replay of a run from its transcript.

The driver :func:`run_fix` is shared with the K_r-free variant in
:mod:`listcolor.fix2`; only the recolouring step and the scan radii differ.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterator, Optional, Sequence

from . import seeds
from .coloring import (
    BLANK,
    Colour,
    ListAssignment,
    available_list,
    external_list,
    init_blank,
    is_proper_full,
    ordered,
)
from .engine import ColoringState
from .flaws import Flaw, FlawParams, Variant, flaw_holds, least_flaw_in_range
from .graph import Graph, is_triangle_free, omega, omega_index

TRANSCRIPT_MODES = ("raw", "compressed", "off")


class ExecutionCapExceeded(RuntimeError):
    def __init__(self, executions: int, cap: int, total: bool = False):
        scope = "total" if total else "per-call"
        super().__init__(f"{scope} execution cap {cap} reached after {executions} recolourings")
        self.executions = executions
        self.cap = cap
        self.total = total


class InvariantViolation(AssertionError):
    pass


class TranscriptError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class FixParams:
    q: int
    flaw_params: FlawParams
    max_executions: Optional[int] = None  # per top-level call; None means 2n
    transcript_mode: str = "raw"
    seed: int = 0
    enum_budget: int = 100_000
    retries: int = 3
    total_cap: Optional[int] = None
    check_invariants: bool = True
    trace: bool = False
    completion_cap: Optional[int] = None
    restarts: int = 10

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.max_executions is not None and self.max_executions < 1:
            raise ValueError("max_executions must be >= 1")
        if self.transcript_mode not in TRANSCRIPT_MODES:
            raise ValueError(f"transcript_mode must be one of {TRANSCRIPT_MODES}")

    def cap_for(self, g: Graph) -> int:
        return self.max_executions if self.max_executions is not None else max(1, 2 * g.n)


# -- transcript -----------------------------------------------------------


@dataclass(frozen=True)
class FixCall:
    kind: str
    ell: int
    bits: int = 0


@dataclass(frozen=True)
class Colours:
    raw: Optional[tuple] = None
    index: Optional[int] = None
    bits: int = 0


@dataclass(frozen=True)
class Return:
    bits: int = 2


Record = FixCall | Colours | Return


@dataclass
class Transcript:
    flaw: Flaw
    records: list = field(default_factory=list)
    executions: int = 0
    mode: str = "raw"

    @property
    def bits(self) -> int:
        return sum(r.bits for r in self.records)

    def check_nesting(self) -> None:
        open_frames = 0
        colours = 0
        expect_colours = True
        for r in self.records:
            if isinstance(r, Colours):
                if not expect_colours:
                    raise TranscriptError("colour record without a preceding call")
                colours += 1
                open_frames += 1
                expect_colours = False
            elif expect_colours:
                raise TranscriptError("call or return where a colour record is due")
            elif isinstance(r, FixCall):
                expect_colours = True
            else:
                open_frames -= 1
                if open_frames < 0:
                    raise TranscriptError("more returns than calls")
        if self.mode != "off" and colours != self.executions:
            raise TranscriptError(f"{colours} colour records for {self.executions} executions")

    def to_lines(self) -> list[str]:
        head = {
            "type": "header",
            "flaw": {"kind": self.flaw.kind, "vertex": self.flaw.vertex},
            "executions": self.executions,
            "mode": self.mode,
        }
        out = [json.dumps(head, sort_keys=True)]
        for r in self.records:
            if isinstance(r, FixCall):
                d = {"type": "fix", "kind": r.kind, "ell": r.ell, "bits": r.bits}
            elif isinstance(r, Colours):
                d = {"type": "colours", "bits": r.bits}
                if r.raw is not None:
                    d["raw"] = list(r.raw)
                else:
                    d["index"] = r.index
            else:
                d = {"type": "return"}
            out.append(json.dumps(d, sort_keys=True))
        return out

    @classmethod
    def parse_many(cls, lines: Sequence[str]) -> list["Transcript"]:
        out: list[Transcript] = []
        for lineno, line in enumerate(lines, 1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                kind = d["type"]
                if kind == "header":
                    fl = d["flaw"]
                    out.append(cls(Flaw(fl["kind"], int(fl["vertex"])), [], int(d["executions"]), d.get("mode", "raw")))
                    continue
                if not out:
                    raise TranscriptError("record before header")
                if kind == "fix":
                    rec = FixCall(d["kind"], int(d["ell"]), int(d.get("bits", 0)))
                elif kind == "colours":
                    raw = d.get("raw")
                    rec = Colours(tuple(raw) if raw is not None else None, d.get("index"), int(d.get("bits", 0)))
                elif kind == "return":
                    rec = Return()
                else:
                    raise TranscriptError(f"unknown record type {kind!r}")
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise TranscriptError(f"line {lineno}: {exc}") from exc
            out[-1].records.append(rec)
        return out


@dataclass
class RunStats:
    executions: int = 0
    discarded_executions: int = 0
    b_fixes: int = 0
    z_fixes: int = 0
    lam: float = 0.0
    step_log2: list = field(default_factory=list)
    transcript_bits: int = 0
    top_level_calls: int = 0
    fix_calls: int = 0
    postcondition_checks: int = 0
    z_entry_checks: int = 0
    retries: int = 0
    restarts: int = 0
    completion: str = ""
    completion_iterations: int = 0

    def record_step(self, f: Flaw, size: int) -> None:
        self.executions += 1
        if f.kind == "B":
            self.b_fixes += 1
        else:
            self.z_fixes += 1
        x = math.log2(size)
        self.lam += x
        self.step_log2.append(x)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d.pop("step_log2")
        return d


@dataclass
class TraceStep:
    flaw: Flaw
    before: list
    changed: tuple


# -- step context and compressed colour indices ---------------------------


@dataclass(frozen=True)
class StepContext:
    """What is fixed while ``N_v`` is recoloured: the lists of the
    neighbours, ``C_v`` and the edges inside ``N_v`` (as index pairs)."""

    vertex: int
    neighbours: tuple[int, ...]
    lists: tuple[tuple, ...]
    cv: frozenset
    inner_edges: tuple[tuple[int, int], ...] = ()

    @property
    def product_size(self) -> int:
        return math.prod(len(l) for l in self.lists)


def step_context(g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, variant: Variant) -> StepContext:
    nbrs = g.adj[v]
    if variant is Variant.TRIANGLE_FREE:
        step = tuple(tuple(ordered(available_list(g, lists, sigma, u))) for u in nbrs)
    else:
        step = tuple(tuple(ordered(external_list(g, lists, sigma, v, u))) for u in nbrs)
    return StepContext(v, nbrs, step, lists[v], _inner_edges(g, nbrs))


def _inner_edges(g: Graph, nbrs: Sequence[int]) -> tuple[tuple[int, int], ...]:
    pos = {u: i for i, u in enumerate(nbrs)}
    return tuple(
        (pos[u], pos[w]) for u in nbrs for w in g.adj[u] if w in pos and pos[u] < pos[w]
    )


def colouring_flawed(ctx: StepContext, colours: Sequence[Colour], params: FlawParams) -> bool:
    """Whether the vertex of ``ctx`` has a B or Z flaw when its neighbours
    carry ``colours`` (lists of the neighbours held fixed)."""
    used = set(colours)
    lv = {c for c in ctx.cv if c not in used}
    if len(lv) + 1 < params.L:
        return True
    if params.variant is Variant.CLIQUE_FREE:
        return sum(1 for c in colours if c is BLANK) >= params.L
    s = sum(len(lv.intersection(lst)) for lst, c in zip(ctx.lists, colours) if c is BLANK)
    return s > params.L * (len(lv) + 1) / 10


def _valid(ctx: StepContext, colours: Sequence[Colour]) -> bool:
    return all(colours[a] is BLANK or colours[a] != colours[b] for a, b in ctx.inner_edges)


def flawed_colourings(ctx: StepContext, params: FlawParams, budget: int) -> Iterator[tuple]:
    """``B(L) ∪ Z(L)`` in lexicographic order (vertex label, then colour id,
    Blank last).  Colourings with a conflict inside ``N_v`` are skipped."""
    if ctx.product_size > budget:
        raise BudgetExceeded(f"{ctx.product_size} candidate colourings exceed budget {budget}")
    for cols in product(*ctx.lists):
        if _valid(ctx, cols) and colouring_flawed(ctx, cols, params):
            yield cols


def compressed_colours_index(ctx: StepContext, colours: Sequence[Colour], params: FlawParams, budget: int) -> tuple[int, int]:
    """1-based rank of ``colours`` among the flawed colourings, and their count."""
    target = tuple(colours)
    rank = None
    count = 0
    for cols in flawed_colourings(ctx, params, budget):
        count += 1
        if cols == target:
            rank = count
    if rank is None:
        raise ValueError("colouring does not exhibit a flaw at this vertex")
    return rank, count


def colours_at_index(ctx: StepContext, ell: int, params: FlawParams, budget: int) -> tuple:
    if ell < 1:
        raise IndexError(f"index {ell} out of range")
    for i, cols in enumerate(flawed_colourings(ctx, params, budget), 1):
        if i == ell:
            return cols
    raise IndexError(f"index {ell} out of range")


def _bits(n: int) -> int:
    return max(0, math.ceil(math.log2(n))) if n > 1 else 0


# -- recolouring ----------------------------------------------------------


def recolor_neighborhood(
    g: Graph, lists: ListAssignment, sigma: Sequence[Colour], v: int, rng: random.Random
) -> tuple[dict[int, Colour], int]:
    """Uniform independent colours for ``N_v`` from the current lists.

    Returns the new colours of ``N_v`` and the number of possible outcomes.
    One ``randrange`` over the product, decomposed neighbour by neighbour in
    ascending label order (least significant first).
    """
    nbrs = g.adj[v]
    inside = g.nbr_sets[v]
    if any(not inside.isdisjoint(g.nbr_sets[u]) for u in nbrs):
        raise InvariantViolation(f"neighbourhood of {v} is not independent (triangle present)")
    options = [ordered(available_list(g, lists, sigma, u)) for u in nbrs]
    chosen, size = seeds.draw_product(options, rng)
    return dict(zip(nbrs, chosen)), size


def _recolor_tf(state: ColoringState, v: int, rng: random.Random) -> tuple[dict[int, Colour], int]:
    nbrs = state.g.adj[v]
    options = [sorted(state.avail[u]) + [BLANK] for u in nbrs]
    chosen, size = seeds.draw_product(options, rng)
    return dict(zip(nbrs, chosen)), size


def _state_context(state: ColoringState, v: int) -> StepContext:
    g = state.g
    nbrs = g.adj[v]
    if state.tf:
        step = tuple(tuple(sorted(state.avail[u]) + [BLANK]) for u in nbrs)
    else:
        step = tuple(tuple(ordered(state.external(v, u))) for u in nbrs)
    return StepContext(v, nbrs, step, state.lists[v], _inner_edges(g, nbrs))


# -- the repair driver ----------------------------------------------------

Recolor = Callable[[ColoringState, int, random.Random], "tuple[dict[int, Colour], int]"]


@dataclass
class _Frame:
    flaw: Flaw
    entry: Optional[tuple[frozenset[int], frozenset[int]]]


def run_fix(
    state: ColoringState,
    f: Flaw,
    params: FixParams,
    rng: random.Random,
    stats: RunStats,
    recolor: Recolor,
    trace: Optional[list] = None,
) -> Transcript:
    """Repair ``f`` in place on ``state``; returns the transcript.

    The recursion of the textbook procedure is run on an explicit stack.
    ``Colours`` is written from the colouring before the recolouring, a
    ``FixCall`` precedes each child's records and ``Return`` is written when
    a frame pops.
    """
    g = state.g
    cap = params.cap_for(g)
    mode = params.transcript_mode
    fp = state.params
    check = params.check_invariants
    transcript = Transcript(f, mode=mode)
    records = transcript.records
    if not state.holds(f):
        raise InvariantViolation(f"repair called on {f}, which does not hold")
    local = 0
    stack: list[_Frame] = []

    def execute(flaw: Flaw) -> None:
        nonlocal local
        if local >= cap:
            raise ExecutionCapExceeded(local, cap)
        if params.total_cap is not None and stats.executions + stats.discarded_executions >= params.total_cap:
            raise ExecutionCapExceeded(stats.executions + stats.discarded_executions, params.total_cap, total=True)
        v = flaw.vertex
        if not state.tf and flaw.kind == "Z" and check:
            bad = [w for w in g.adj[v] if w in state.bflaws]
            stats.z_entry_checks += 1
            if bad:
                raise InvariantViolation(f"B flaw at neighbours {bad} when repairing {flaw}")
            small = [u for u in g.adj[v] if len(state.external(v, u)) < fp.L]
            if small:
                raise InvariantViolation(f"external lists below L at {small} when repairing {flaw}")
        nbrs = g.adj[v]
        ctx = None
        if mode != "off" or check:
            ctx = _state_context(state, v)
        before = [state.sigma[u] for u in nbrs]
        if mode == "raw":
            bits = sum(_bits(len(l)) for l in ctx.lists)
            records.append(Colours(raw=tuple(before), bits=bits + 2))
        elif mode == "compressed":
            if ctx.product_size <= params.enum_budget:
                ell, count = compressed_colours_index(ctx, before, fp, params.enum_budget)
                records.append(Colours(index=ell, bits=_bits(count) + 2))
            else:
                bits = sum(_bits(len(l)) for l in ctx.lists)
                records.append(Colours(raw=tuple(before), bits=bits + 2))
        entry = state.snapshot() if check else None
        if trace is not None:
            trace.append(TraceStep(flaw, list(state.sigma), nbrs))
        colours, size = recolor(state, v, rng)
        state.assign(colours)
        if check and state.tf:
            after = _state_context(state, v)
            if after.lists != ctx.lists:
                raise InvariantViolation(f"neighbour lists of {v} changed during its recolouring")
        local += 1
        stats.fix_calls += 1
        stats.record_step(flaw, size)
        stack.append(_Frame(flaw, entry))

    execute(f)
    while stack:
        frame = stack[-1]
        v = frame.flaw.vertex
        nxt = state.least_in_range(v)
        if nxt is None:
            if check:
                if state.holds(frame.flaw):
                    raise InvariantViolation(f"{frame.flaw} still holds on return")
                b0, z0 = frame.entry
                new_b = state.bflaws - b0
                new_z = state.zflaws - z0
                if new_b or new_z:
                    raise InvariantViolation(
                        f"repair of {frame.flaw} created flaws B{sorted(new_b)} Z{sorted(new_z)}"
                    )
                stats.postcondition_checks += 1
            if mode != "off":
                records.append(Return())
            stack.pop()
            continue
        if mode != "off":
            ball = len(g.ball(v, 3))
            records.append(FixCall(nxt.kind, omega_index(g, v, nxt.vertex), bits=3 + _bits(ball)))
        execute(nxt)
    transcript.executions = local
    stats.transcript_bits += transcript.bits
    return transcript


def fix(
    g: Graph,
    lists: ListAssignment,
    sigma: Sequence[Colour],
    f: Flaw,
    params: FixParams,
    rng: Optional[random.Random] = None,
    stats: Optional[RunStats] = None,
    trace: Optional[list] = None,
) -> tuple[list, Transcript, RunStats]:
    """Stand-alone repair of one flaw; returns (new colouring, transcript, stats)."""
    if params.flaw_params.variant is not Variant.TRIANGLE_FREE:
        raise ValueError("fix() is the triangle-free procedure; use fix2() for K_r-free graphs")
    if not is_triangle_free(g):
        raise InvariantViolation("graph contains a triangle")
    state = ColoringState(g, lists, sigma, params.flaw_params)
    stats = stats if stats is not None else RunStats()
    rng = rng if rng is not None else seeds.stream(params.seed, seeds.RECOLOR, 0, 0)
    transcript = run_fix(state, f, params, rng, stats, _recolor_tf, trace)
    return state.sigma, transcript, stats


# -- pipeline -------------------------------------------------------------


@dataclass
class RunResult:
    coloring: list
    flaw_free: list
    stats: RunStats
    transcripts: list
    trace: Optional[list] = None


def drive_to_flaw_free(
    g: Graph,
    lists: ListAssignment,
    params: FixParams,
    recolor: Recolor,
    sigma0: Optional[Sequence[Colour]] = None,
    stats: Optional[RunStats] = None,
    restart: int = 0,
) -> tuple[list, RunStats, list, Optional[list]]:
    """Call the repair procedure on the least holding flaw until none is left.

    A call that hits the per-call execution cap is rolled back and retried
    with a fresh sub-stream, at most ``params.retries`` times.
    """
    sigma = list(sigma0) if sigma0 is not None else init_blank(g, lists)
    state = ColoringState(g, lists, sigma, params.flaw_params)
    stats = stats if stats is not None else RunStats()
    transcripts: list[Transcript] = []
    trace: Optional[list] = [] if params.trace else None
    initial = state.flaw_count()
    if initial > 2 * g.n:
        raise InvariantViolation(f"{initial} initial flaws on {g.n} vertices")
    calls = 0
    while True:
        f = state.least_flaw()
        if f is None:
            break
        before = state.flaw_count()
        saved = list(state.sigma)
        for attempt in range(params.retries + 1):
            rng = seeds.stream(params.seed, seeds.RECOLOR, *_salt(restart), calls, attempt)
            mark = len(trace) if trace is not None else 0
            executed, b_fixes, z_fixes = stats.executions, stats.b_fixes, stats.z_fixes
            try:
                t = run_fix(state, f, params, rng, stats, recolor, trace)
                break
            except ExecutionCapExceeded as exc:
                wasted = stats.executions - executed
                stats.executions, stats.b_fixes, stats.z_fixes = executed, b_fixes, z_fixes
                stats.discarded_executions += wasted
                del stats.step_log2[executed:]
                stats.lam = math.fsum(stats.step_log2)
                if trace is not None:
                    del trace[mark:]
                if exc.total or attempt == params.retries:
                    raise
                stats.retries += 1
                state = ColoringState(g, lists, saved, params.flaw_params)
        transcripts.append(t)
        calls += 1
        stats.top_level_calls = calls
        after = state.flaw_count()
        if after >= before:
            raise InvariantViolation(f"flaw count went from {before} to {after} after repairing {f}")
        if calls > initial:
            raise InvariantViolation("more top-level calls than initial flaws")
    if params.check_invariants:
        state.check_consistency()
    return state.sigma, stats, transcripts, trace


def _salt(restart: int) -> tuple:
    # restart 0 keeps the plain stream names so single-attempt runs are unaffected
    return ("restart", restart) if restart else ()


def complete_with_restarts(
    g: Graph,
    lists: ListAssignment,
    params: FixParams,
    recolor: Recolor,
    complete: Callable[[list, RunStats, random.Random], list],
) -> RunResult:
    """Drive to flaw-freedom and complete; if completion fails, start over
    from all-Blank on fresh sub-streams, at most ``params.restarts`` times.

    Executions of abandoned attempts are counted as discarded, so the total
    execution cap spans all attempts.
    """
    from .completion import CompletionFailed

    stats = RunStats()
    for restart in range(params.restarts + 1):
        done = stats.executions
        stats.executions = 0
        stats.discarded_executions += done
        stats.step_log2.clear()
        stats.lam = 0.0
        stats.b_fixes = stats.z_fixes = 0
        stats.transcript_bits = 0
        sigma, stats, transcripts, trace = drive_to_flaw_free(
            g, lists, params, recolor, stats=stats, restart=restart
        )
        rng = seeds.stream(params.seed, seeds.COMPLETION, *_salt(restart))
        try:
            full = complete(sigma, stats, rng)
        except CompletionFailed:
            if restart == params.restarts:
                raise
            stats.restarts += 1
            continue
        if not is_proper_full(g, lists, full):
            raise InvariantViolation("completion returned an improper colouring")
        return RunResult(full, sigma, stats, transcripts, trace)
    raise AssertionError("unreachable")


def run_pipeline(g: Graph, lists: ListAssignment, params: FixParams) -> RunResult:
    """Blank start, repair to flaw-freedom, then resampling completion."""
    from .completion import moser_tardos_complete

    if params.flaw_params.variant is not Variant.TRIANGLE_FREE:
        raise ValueError("run_pipeline handles the triangle-free variant; use run_pipeline_kr")
    if not is_triangle_free(g):
        raise InvariantViolation("graph contains a triangle")

    def complete(sigma: list, stats: RunStats, rng: random.Random) -> list:
        full, stats.completion_iterations = moser_tardos_complete(
            g, lists, sigma, params.flaw_params, rng, cap=params.completion_cap
        )
        stats.completion = "moser-tardos"
        return full

    return complete_with_restarts(g, lists, params, _recolor_tf, complete)


# -- replay ---------------------------------------------------------------


@dataclass
class Reconstruction:
    colourings: list  # sigma_0 .. sigma_{t-1}: the colouring before each step
    flaws: list  # f_1 .. f_t


def _parse_flaws(g: Graph, transcript: Transcript) -> tuple[list[Flaw], list[Colours], list[tuple]]:
    flaws: list[Flaw] = []
    colours: list[Colours] = []
    events: list[tuple] = []  # (record kind, steps done, parent flaw, child flaw)
    stack: list[Flaw] = []
    pending: Optional[Flaw] = transcript.flaw
    for rec in transcript.records:
        if isinstance(rec, Colours):
            if pending is None:
                raise TranscriptError("colour record without a preceding call")
            flaws.append(pending)
            colours.append(rec)
            stack.append(pending)
            pending = None
        elif isinstance(rec, FixCall):
            if pending is not None or not stack:
                raise TranscriptError("call record out of place")
            if rec.kind not in ("B", "Z"):
                raise TranscriptError(f"bad flaw kind {rec.kind!r}")
            parent = stack[-1]
            try:
                w = omega(g, parent.vertex, rec.ell)
            except IndexError as exc:
                raise TranscriptError(str(exc)) from exc
            pending = Flaw(rec.kind, w)
            events.append(("call", len(flaws), parent, pending))
        else:
            if pending is not None or not stack:
                raise TranscriptError("return record out of place")
            events.append(("return", len(flaws), stack.pop(), None))
    if pending is not None:
        raise TranscriptError("transcript ends inside a call")
    if len(flaws) != transcript.executions:
        raise TranscriptError(f"{len(flaws)} steps recorded, header says {transcript.executions}")
    return flaws, colours, events


def reconstruct(
    g: Graph,
    lists: ListAssignment,
    sigma0: Optional[Sequence[Colour]],
    transcript: Transcript,
    sigma_t: Sequence[Colour],
    flaw_params: FlawParams,
    budget: int = 100_000,
    verify: bool = True,
) -> Reconstruction:
    """Recover every intermediate colouring of a repair run.

    The flaw sequence comes from the call/return structure alone; the
    colourings are then peeled off backwards from ``sigma_t``.  With
    ``verify`` the result is replayed against the flaw predicates so a
    tampered transcript is reported rather than silently accepted.
    """
    if transcript.mode == "off":
        raise TranscriptError("transcript was recorded with mode 'off'")
    flaws, colours, events = _parse_flaws(g, transcript)
    sigma = list(sigma_t)
    out: list = [None] * len(flaws)
    for i in range(len(flaws) - 1, -1, -1):
        v = flaws[i].vertex
        nbrs = g.adj[v]
        ctx = step_context(g, lists, sigma, v, flaw_params.variant)
        now = tuple(sigma[u] for u in nbrs)
        if any(c not in l for c, l in zip(now, ctx.lists)):
            raise TranscriptError(f"step {i + 1}: current colours of N_{v} are not in their lists")
        rec = colours[i]
        if rec.raw is not None:
            pre = tuple(rec.raw)
            if len(pre) != len(nbrs):
                raise TranscriptError(f"step {i + 1}: {len(pre)} colours for {len(nbrs)} neighbours")
        else:
            try:
                pre = colours_at_index(ctx, int(rec.index), flaw_params, budget)
            except IndexError as exc:
                raise TranscriptError(f"step {i + 1}: {exc}") from exc
        if any(c not in l for c, l in zip(pre, ctx.lists)):
            raise TranscriptError(f"step {i + 1}: recorded colours of N_{v} are not in their lists")
        for u, c in zip(nbrs, pre):
            sigma[u] = c
        out[i] = list(sigma)
    if sigma0 is not None and out and out[0] != list(sigma0):
        raise TranscriptError("reconstructed initial colouring disagrees with sigma_0")
    if sigma0 is not None and not out and list(sigma0) != list(sigma_t):
        raise TranscriptError("empty run but sigma_0 != sigma_t")
    if verify:
        _verify_replay(g, lists, out, list(sigma_t), flaws, events, flaw_params)
    return Reconstruction(out, flaws)


def reconstruct_run(
    g: Graph,
    lists: ListAssignment,
    sigma0: Sequence[Colour],
    transcripts: Sequence[Transcript],
    sigma_t: Sequence[Colour],
    flaw_params: FlawParams,
    budget: int = 100_000,
    verify: bool = True,
) -> list[Reconstruction]:
    """Reconstruct consecutive top-level calls, last to first.  Each call's
    starting colouring is the end point of the one before it."""
    out: list[Reconstruction] = []
    cur = list(sigma_t)
    for t in reversed(transcripts):
        rec = reconstruct(g, lists, None, t, cur, flaw_params, budget, verify)
        out.append(rec)
        if rec.colourings:
            cur = rec.colourings[0]
    if cur != list(sigma0):
        raise TranscriptError("reconstructed initial colouring disagrees with sigma_0")
    out.reverse()
    return out


def _verify_replay(g, lists, colourings, final, flaws, events, fp) -> None:
    def at(steps: int) -> list:
        return colourings[steps] if steps < len(colourings) else final

    for i, (f, s) in enumerate(zip(flaws, colourings)):
        if not flaw_holds(g, lists, s, f, fp):
            raise TranscriptError(f"step {i + 1}: {f} does not hold before its repair")
    for kind, steps, parent, child in events:
        least = least_flaw_in_range(g, lists, at(steps), parent.vertex, fp)
        if least != child:
            what = "call" if kind == "call" else "return"
            raise TranscriptError(f"{what} after step {steps}: expected {least}, transcript has {child}")


def entropy_report(stats: RunStats, transcript: Optional[Transcript] = None) -> dict:
    """Random bits consumed versus bits written, per step and in total."""
    bits = transcript.bits if transcript is not None else stats.transcript_bits
    t = stats.executions
    return {
        "executions": t,
        "lambda": stats.lam,
        "lambda_floor": math.floor(stats.lam) if t else 0,
        "transcript_bits": bits,
        "margin_total": stats.lam - bits,
        "margin_per_step": (stats.lam - bits) / t if t else 0.0,
    }
