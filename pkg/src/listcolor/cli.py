"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 an execution, iteration or enumeration cap was hit.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .analytics import (
    Family,
    check_lmu,
    check_shearer_count,
    chernoff_grid,
    complement,
    conjunction_probability,
    expected_Lv,
    list_context,
    lmu_threshold,
    median_independent_set_size,
    mc_flaw_probability,
    negative_correlation_exact,
    negatively_correlated,
    random_list_fixture,
    shearer_bounds,
    urn_distribution,
)
from .coloring import ColoringError, ListAssignment, conflicts, is_proper_full
from .completion import CompletionFailed, IterationCapExceeded, greedy_complete, moser_tardos_complete
from .config import ConfigError, RunConfig, default_L, resolve_params
from .fix import (
    BudgetExceeded,
    ExecutionCapExceeded,
    Transcript,
    TranscriptError,
    entropy_report,
    reconstruct_run,
    run_pipeline,
)
from .fix2 import run_pipeline_kr
from .flaws import FlawParams, Variant, all_flaws
from .graph import Graph, GraphError, build_graph, clique_number_at_most, generate
from .seeds import COMPLETION, stream

OUTPUT_DIR_ENV = "LISTCOLOR_OUTPUT_DIR"

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- argument groups -----------------------------------------------------------


def _graph_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("graph")
    g.add_argument("--graph", metavar="PATH", help="graph file (DIMACS .col or 0-indexed edge list)")
    g.add_argument("--format", choices=("dimacs", "edgelist"), help="graph file format (default: by extension)")
    g.add_argument("--gen", metavar="SPEC", help="generator spec, e.g. cycle:6 or bipartite:500,500,0.02")


def _lists_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("lists")
    g.add_argument("--lists", metavar="PATH", help='JSON lists file {"vertex": [colour, ...]}')
    g.add_argument("--uniform-q", type=int, metavar="N", help="random N-colour lists for every vertex")
    g.add_argument("--palette", type=int, metavar="P", help="palette size for --uniform-q (default N)")


def _flaw_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("parameters")
    g.add_argument("--variant", choices=("tf", "kr"), default="tf", help="triangle-free (tf) or K_r-free (kr); default tf")
    g.add_argument("--epsilon", type=float, default=0.5, help="epsilon for the tf formulas (default 0.5)")
    g.add_argument("--r", type=int, default=4, help="clique size excluded in the kr variant (default 4)")
    g.add_argument("--q", type=int, help="list size; default ceil((1+eps)D/lnD) for tf, ceil(200 r D lnlnD/lnD) for kr")
    g.add_argument("--L", type=float, help="flaw threshold; default D^(eps/2) for tf, D^(9/10) for kr")
    g.add_argument("--seed", type=int, default=0, help="master seed (default 0)")


def _run_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run control")
    g.add_argument("--cap", type=int, help="recolourings per top-level call (default 2n)")
    g.add_argument("--total-cap", type=int, help="recolourings over the whole run, discarded attempts included")
    g.add_argument("--retries", type=int, default=3, help="retries of a top-level call after hitting --cap (default 3)")
    g.add_argument("--restarts", type=int, default=10, help="fresh restarts if completion fails (default 10)")
    g.add_argument("--enum-budget", type=int, default=100_000, help="enumeration budget for compressed records (default 1e5)")
    g.add_argument("--transcript-mode", choices=("raw", "compressed", "off"), default="raw")
    g.add_argument("--transcript", metavar="PATH", help="write the transcript as JSON lines")


def _out_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", metavar="PATH", help=f"output file (relative paths go under ${OUTPUT_DIR_ENV} if set)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="listcolor", description="List colouring by recursive neighbourhood recolouring.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("color", help="colour a graph from its lists")
    _graph_args(p)
    _lists_args(p)
    _flaw_args(p)
    _run_args(p)
    _out_arg(p)
    p.add_argument("--config", metavar="PATH", help="reuse the config embedded in an earlier output")

    p = sub.add_parser("verify", help="check that a colouring is a full proper list colouring")
    _graph_args(p)
    _lists_args(p)
    p.add_argument("--coloring", required=True, metavar="PATH")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("flaws", help="print the flaws of a partial colouring as JSON lines")
    _graph_args(p)
    _lists_args(p)
    _flaw_args(p)
    p.add_argument("--coloring", required=True, metavar="PATH")

    p = sub.add_parser("complete", help="complete a flaw-free partial colouring")
    _graph_args(p)
    _lists_args(p)
    _flaw_args(p)
    p.add_argument("--coloring", required=True, metavar="PATH")
    p.add_argument("--method", choices=("mt", "greedy"), default="mt")
    p.add_argument("--iteration-cap", type=int, help="resampling rounds (default 100 x blanks)")
    _out_arg(p)

    p = sub.add_parser("reconstruct", help="replay a run from its transcript")
    _graph_args(p)
    _lists_args(p)
    _flaw_args(p)
    p.add_argument("--transcript", required=True, metavar="PATH")
    p.add_argument("--final", required=True, metavar="PATH", help="colouring after the repair phase (a color output works)")
    p.add_argument("--initial", metavar="PATH", help="starting colouring (default all Blank)")
    p.add_argument("--enum-budget", type=int, default=100_000)
    _out_arg(p)

    p = sub.add_parser("lab", help="validation experiments (CSV rows plus a JSON summary)")
    p.add_argument("experiment", choices=("shearer", "lncv", "flawprob", "negcorr"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--fixtures", type=int, default=50)
    p.add_argument("--max-n", type=int, default=7, help="largest graph order for shearer (default 7)")
    p.add_argument("--rs", default="3,4,5", help="clique sizes for shearer (default 3,4,5)")
    p.add_argument("--csv", metavar="PATH", help="CSV destination (default stdout)")
    _out_arg(p)

    p = sub.add_parser("bench", help="execution counts and failure rates across list sizes")
    _graph_args(p)
    _flaw_args(p)
    p.add_argument("--qs", help="comma-separated list sizes to sweep")
    p.add_argument("--q-range", help="lo,hi for a binary search on the failure rate")
    p.add_argument("--target-rate", type=float, default=0.05)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--cap", type=int)
    p.add_argument("--csv", metavar="PATH")
    _out_arg(p)

    p = sub.add_parser("gen", help="write a generated graph")
    p.add_argument("--gen", required=True, metavar="SPEC")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("dimacs", "edgelist"))
    _out_arg(p)
    return parser


# -- helpers -------------------------------------------------------------------


def _out_path(path: Optional[str]) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, path: Optional[str]) -> None:
    p = _out_path(path)
    if p is None:
        sys.stdout.write(text)
    else:
        p.write_text(text)


def _announce(config: dict, seed: int) -> None:
    print(f"config: {json.dumps(config, sort_keys=True)}", file=sys.stderr)
    print(f"seed: {seed}", file=sys.stderr)


def _load_graph(args, seed: int) -> Graph:
    if (args.graph is None) == (args.gen is None):
        raise UsageError("give exactly one of --graph and --gen")
    if args.gen is not None:
        return generate(args.gen, seed)
    return io.parse_graph(args.graph, args.format)


def _load_lists(args, g: Graph, seed: int, default_q: Optional[int] = None) -> ListAssignment:
    if args.lists is not None and args.uniform_q is not None:
        raise UsageError("give at most one of --lists and --uniform-q")
    if args.lists is not None:
        return io.read_lists(args.lists, g.n)
    q = args.uniform_q if args.uniform_q is not None else default_q
    if q is None:
        raise UsageError("give --lists or --uniform-q")
    return ListAssignment.uniform(g.n, q, args.palette or q, seed)


def _flaw_params(args, g: Graph) -> FlawParams:
    if args.L is None and g.max_degree <= 1:
        raise UsageError(f"max degree {g.max_degree} is too small for the default L; pass --L")
    L = args.L if args.L is not None else default_L(args.variant, g.max_degree, args.epsilon)
    return FlawParams(
        Variant.TRIANGLE_FREE if args.variant == "tf" else Variant.CLIQUE_FREE,
        L,
        epsilon=args.epsilon if args.variant == "tf" else None,
        r=args.r if args.variant == "kr" else None,
    )


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        graph=args.graph,
        graph_format=getattr(args, "format", None),
        gen=args.gen,
        lists=getattr(args, "lists", None),
        uniform_q=getattr(args, "uniform_q", None),
        palette=getattr(args, "palette", None),
        variant=args.variant,
        epsilon=args.epsilon,
        r=args.r,
        q=args.q,
        L=args.L,
        seed=args.seed,
        cap=getattr(args, "cap", None),
        total_cap=getattr(args, "total_cap", None),
        retries=getattr(args, "retries", 3),
        restarts=getattr(args, "restarts", 10),
        enum_budget=getattr(args, "enum_budget", 100_000),
        transcript_mode=getattr(args, "transcript_mode", "raw"),
    )


def _write_csv(rows: list[dict], path: Optional[str]) -> None:
    buf = _io.StringIO()
    if rows:
        keys: list[str] = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    _emit(buf.getvalue(), path)


# -- commands -------------------------------------------------------------------


def run_color(config: RunConfig, output: Optional[str], transcript_path: Optional[str]) -> int:
    g = generate(config.gen, config.seed) if config.gen else io.parse_graph(config.graph, config.graph_format)
    params, resolved, warnings = resolve_params(config, g)
    if config.lists is not None:
        lists = io.read_lists(config.lists, g.n)
    else:
        q = config.uniform_q or params.q
        lists = ListAssignment.uniform(g.n, q, config.palette or q, config.seed)
    cfg = config.to_dict()
    _announce(cfg, config.seed)
    print(f"resolved: {json.dumps(resolved, sort_keys=True)}", file=sys.stderr)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    pipeline = run_pipeline if config.variant == "tf" else run_pipeline_kr
    result = pipeline(g, lists, params)
    ok = is_proper_full(g, lists, result.coloring)
    body = {
        "resolved": resolved,
        "warnings": warnings,
        "verified": ok,
        "stats": result.stats.as_dict(),
        "entropy": entropy_report(result.stats),
        "coloring": io.coloring_to_json(result.coloring, lists),
        "flaw_free": io.coloring_to_json(result.flaw_free, lists),
    }
    _emit(io.dumps(io.envelope(cfg, config.seed, body)), output)
    if transcript_path is not None and config.transcript_mode != "off":
        lines = [line for t in result.transcripts for line in t.to_lines()]
        p = _out_path(transcript_path)
        p.write_text("\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_color(args) -> int:
    if args.config:
        obj = json.loads(Path(args.config).read_text())
        config = RunConfig.from_dict(obj.get("config", obj))
    else:
        config = _config_from_args(args)
    return run_color(config, args.output, args.transcript)


def cmd_verify(args) -> int:
    g = _load_graph(args, args.seed)
    lists = _load_lists(args, g, args.seed)
    sigma = io.read_coloring(args.coloring, lists)
    bad = conflicts(g, lists, sigma)
    if not bad:
        print("ok: full proper list colouring")
        return EXIT_OK
    for item in bad:
        if item[0] == "monochromatic":
            print(f"monochromatic edge {item[1]}-{item[2]} (colour {lists.colour_name(item[3])})")
        elif item[0] == "blank":
            print(f"vertex {item[1]} is Blank")
        else:
            print(f"vertex {item[1]} has colour {lists.colour_name(item[2])} outside its list")
    return EXIT_VERIFY


def cmd_flaws(args) -> int:
    g = _load_graph(args, args.seed)
    lists = _load_lists(args, g, args.seed)
    sigma = io.read_coloring(args.coloring, lists)
    fp = _flaw_params(args, g)
    for f in all_flaws(g, lists, sigma, fp):
        print(json.dumps({"kind": f.kind, "vertex": f.vertex}))
    return EXIT_OK


def cmd_complete(args) -> int:
    g = _load_graph(args, args.seed)
    lists = _load_lists(args, g, args.seed)
    sigma = io.read_coloring(args.coloring, lists)
    fp = _flaw_params(args, g)
    _announce({"method": args.method, "L": fp.L, "variant": args.variant}, args.seed)
    if args.method == "greedy":
        full = greedy_complete(g, lists, sigma)
        rounds = 0
    else:
        full, rounds = moser_tardos_complete(g, lists, sigma, fp, stream(args.seed, COMPLETION), cap=args.iteration_cap)
    body = {"method": args.method, "rounds": rounds, "coloring": io.coloring_to_json(full, lists)}
    _emit(io.dumps(body), args.output)
    return EXIT_OK if is_proper_full(g, lists, full) else EXIT_VERIFY


def cmd_reconstruct(args) -> int:
    g = _load_graph(args, args.seed)
    lists = _load_lists(args, g, args.seed)
    fp = _flaw_params(args, g)
    final_obj = json.loads(Path(args.final).read_text())
    if "flaw_free" in final_obj:
        final_obj = final_obj["flaw_free"]
    sigma_t = io.coloring_from_json(final_obj, lists)
    sigma0 = io.read_coloring(args.initial, lists) if args.initial else [None] * g.n
    transcripts = Transcript.parse_many(Path(args.transcript).read_text().splitlines())
    try:
        recs = reconstruct_run(g, lists, sigma0, transcripts, sigma_t, fp, args.enum_budget)
    except TranscriptError as exc:
        print(f"reconstruction failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    body = {
        "segments": len(recs),
        "steps": sum(len(r.flaws) for r in recs),
        "flaws": [[f.kind, f.vertex] for r in recs for f in r.flaws],
    }
    _emit(io.dumps(body), args.output)
    return EXIT_OK


def _lab_shearer(args) -> tuple[list[dict], dict]:
    import networkx as nx

    rs = [int(x) for x in args.rs.split(",")]
    rows = []
    failures = 0
    for idx, h in enumerate(nx.graph_atlas_g()):
        if h.number_of_nodes() > args.max_n:
            break
        g = build_graph(h.number_of_nodes(), h.edges())
        for r in rs:
            if not clique_number_at_most(g, r - 1):
                continue
            count, upper, low = shearer_bounds(g, r)
            ok = check_shearer_count(g, r)
            row = {"atlas": idx, "n": g.n, "m": g.edge_count, "r": r, "I": count, "lower": float(low), "upper": upper, "shearer": ok}
            if r == 4 and g.n > 0:
                lmu = check_lmu(g, r)
                thr = lmu_threshold(count, r)
                row.update(median=median_independent_set_size(g), lmu_threshold=None if thr is None else float(thr),
                           lmu="vacuous" if lmu is None else lmu)
                failures += lmu is False
            failures += not ok
            rows.append(row)
    return rows, {"experiment": "shearer", "rows": len(rows), "failures": failures}


def _lab_lncv(args) -> tuple[list[dict], dict]:
    lists, cv = random_list_fixture(50, 30, 60, 20, args.seed)
    families = [
        Family("bernoulli", ps=(0.5,) * 100),
        Family("lists", lists=lists, cv=cv),
        Family("urn", N=200, K=100, m=50),
    ]
    rows = [r.as_dict() for fam in families for r in chernoff_grid(fam, args.trials, args.seed)]
    return rows, {"experiment": "lncv", "rows": len(rows), "failures": sum(r["verdict"] == "fail" for r in rows)}


def _lab_flawprob(args) -> tuple[list[dict], dict]:
    rows = []
    for i in range(args.fixtures):
        lists, cv = random_list_fixture(3, 3, 4, 2, args.seed * 1_000_003 + i)
        ctx = list_context(lists, cv)
        reps = mc_flaw_probability(ctx, FlawParams(Variant.TRIANGLE_FREE, 4), args.trials, args.seed + i)
        for kind, rep in reps.items():
            rows.append({"fixture": i, "event": kind, **rep.as_dict()})
    return rows, {"experiment": "flawprob", "rows": len(rows), "failures": sum(r["verdict"] == "fail" for r in rows)}


def _lab_negcorr(args) -> tuple[list[dict], dict]:
    rows = []
    for i in range(args.fixtures):
        lists, cv = random_list_fixture(3 + i % 3, 2 + i % 3, 5, 2, args.seed * 1_000_003 + i)
        rows.append({"fixture": i, "holds": negative_correlation_exact(lists, cv), "E|L_v|": expected_Lv(lists, cv)})
    urn = urn_distribution()
    y = complement(urn, 3)
    p_all = conjunction_probability(y, 7)
    p_prod = 1
    for i in range(3):
        p_prod *= conjunction_probability(y, 1 << i)
    summary = {
        "experiment": "negcorr",
        "fixtures": len(rows),
        "failures": sum(not r["holds"] for r in rows),
        "urn_x_negatively_correlated": negatively_correlated(urn, 3),
        "urn_y_negatively_correlated": negatively_correlated(y, 3),
        "urn_pr_all_y": str(p_all),
        "urn_product_pr_y": str(p_prod),
    }
    return rows, summary


def cmd_lab(args) -> int:
    runner = {"shearer": _lab_shearer, "lncv": _lab_lncv, "flawprob": _lab_flawprob, "negcorr": _lab_negcorr}[args.experiment]
    _announce({"experiment": args.experiment, "trials": args.trials, "fixtures": args.fixtures}, args.seed)
    rows, summary = runner(args)
    _write_csv(rows, args.csv)
    text = io.dumps(summary)
    if args.output:
        _emit(text, args.output)
    else:
        sys.stderr.write(text)
    return EXIT_OK if summary.get("failures", 0) == 0 else EXIT_VERIFY


def cmd_bench(args) -> int:
    g = _load_graph(args, args.seed)
    if args.L is None:
        raise UsageError("bench needs an explicit --L")

    def trial(q: int) -> list[dict]:
        out = []
        for s in range(args.seeds):
            cfg = RunConfig(gen=args.gen, graph=args.graph, graph_format=args.format, variant=args.variant,
                            epsilon=args.epsilon, r=args.r, q=q, L=args.L, seed=s, cap=args.cap, retries=0,
                            restarts=0, transcript_mode="off", uniform_q=q)
            params, _, _ = resolve_params(cfg, g)
            lists = ListAssignment.uniform(g.n, q, q, s)
            pipeline = run_pipeline if args.variant == "tf" else run_pipeline_kr
            try:
                res = pipeline(g, lists, params)
                out.append({"q": q, "seed": s, "status": "ok", "executions": res.stats.executions})
            except ExecutionCapExceeded as exc:
                out.append({"q": q, "seed": s, "status": "cap", "executions": exc.executions})
            except CompletionFailed:
                out.append({"q": q, "seed": s, "status": "completion", "executions": None})
        return out

    rows: list[dict] = []
    summary: dict = {"graph_delta": g.max_degree, "n": g.n}
    if args.qs:
        for q in (int(x) for x in args.qs.split(",")):
            rows += trial(q)
    elif args.q_range:
        lo, hi = (int(x) for x in args.q_range.split(","))
        found = None
        while lo <= hi:
            mid = (lo + hi) // 2
            batch = trial(mid)
            rows += batch
            rate = sum(r["status"] != "ok" for r in batch) / len(batch)
            if rate <= args.target_rate:
                found, hi = mid, mid - 1
            else:
                lo = mid + 1
        summary["threshold_q"] = found
    else:
        raise UsageError("give --qs or --q-range")
    _announce({"bench": True, "L": args.L, "variant": args.variant}, args.seed)
    _write_csv(rows, args.csv)
    if args.output:
        _emit(io.dumps(summary), args.output)
    return EXIT_OK


def cmd_gen(args) -> int:
    g = generate(args.gen, args.seed)
    fmt = args.format or (io.graph_format(args.output) if args.output else "edgelist")
    text = io.write_dimacs(g) if fmt == "dimacs" else io.write_edgelist(g)
    _emit(text, args.output)
    return EXIT_OK


COMMANDS = {
    "color": cmd_color,
    "verify": cmd_verify,
    "flaws": cmd_flaws,
    "complete": cmd_complete,
    "reconstruct": cmd_reconstruct,
    "lab": cmd_lab,
    "bench": cmd_bench,
    "gen": cmd_gen,
}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ExecutionCapExceeded, BudgetExceeded, IterationCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (CompletionFailed, TranscriptError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (UsageError, ConfigError, io.FormatError, GraphError, ColoringError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
