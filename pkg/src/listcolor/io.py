"""Reading and writing graphs, lists, colourings and run artifacts.

Graphs come as DIMACS ``.col`` files (1-indexed ``e u v`` lines under a
``p edge n m`` header) or whitespace edge lists (0-indexed, one edge per
line, optionally preceded by a ``# vertices: n`` line so trailing isolated
vertices survive a round trip).  Everything else is JSON.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from .coloring import BLANK, Colour, ListAssignment
from .graph import Graph, GraphError, build_graph


class FormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


# -- graphs ------------------------------------------------------------------


def parse_dimacs(text: str) -> Graph:
    n: Optional[int] = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if n is not None:
                raise FormatError("second problem line", lineno)
            if len(parts) != 4 or parts[1] not in ("edge", "col"):
                raise FormatError(f"expected 'p edge <n> <m>', got {raw.strip()!r}", lineno)
            n = _int(parts[2], lineno)
            _int(parts[3], lineno)
        elif tag == "e":
            if n is None:
                raise FormatError("edge line before the problem line", lineno)
            if len(parts) != 3:
                raise FormatError(f"expected 'e <u> <v>', got {raw.strip()!r}", lineno)
            u, v = _int(parts[1], lineno), _int(parts[2], lineno)
            for x in (u, v):
                if not 1 <= x <= n:
                    raise FormatError(f"vertex {x} outside 1..{n}", lineno)
            if u == v:
                raise FormatError(f"self-loop at vertex {u}", lineno)
            edges.append((u - 1, v - 1))
        else:
            raise FormatError(f"unknown line type {tag!r}", lineno)
    if n is None:
        raise FormatError("missing 'p edge' problem line")
    return build_graph(n, edges)


def parse_edgelist(text: str) -> Graph:
    n_declared: Optional[int] = None
    edges: list[tuple[int, int]] = []
    top = -1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            if key.strip() == "vertices":
                n_declared = _int(val.strip(), lineno)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"expected two vertex labels, got {line!r}", lineno)
        u, v = _int(parts[0], lineno), _int(parts[1], lineno)
        if u < 0 or v < 0:
            raise FormatError("negative vertex label", lineno)
        if u == v:
            raise FormatError(f"self-loop at vertex {u}", lineno)
        if n_declared is not None and max(u, v) >= n_declared:
            raise FormatError(f"vertex {max(u, v)} outside 0..{n_declared - 1}", lineno)
        edges.append((u, v))
        top = max(top, u, v)
    n = n_declared if n_declared is not None else top + 1
    return build_graph(n, edges)


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"expected an integer, got {tok!r}", lineno) from None


def graph_format(path: str | Path, fmt: Optional[str] = None) -> str:
    if fmt:
        if fmt not in ("dimacs", "edgelist"):
            raise FormatError(f"unknown graph format {fmt!r}")
        return fmt
    return "dimacs" if str(path).endswith((".col", ".dimacs")) else "edgelist"


def parse_graph(path: str | Path, fmt: Optional[str] = None) -> Graph:
    text = Path(path).read_text()
    try:
        if graph_format(path, fmt) == "dimacs":
            return parse_dimacs(text)
        return parse_edgelist(text)
    except GraphError as exc:
        raise FormatError(str(exc)) from exc


def write_dimacs(g: Graph) -> str:
    lines = [f"p edge {g.n} {g.edge_count}"]
    lines += [f"e {u + 1} {v + 1}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def write_edgelist(g: Graph) -> str:
    lines = [f"# vertices: {g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def write_graph(g: Graph, path: str | Path, fmt: Optional[str] = None) -> None:
    text = write_dimacs(g) if graph_format(path, fmt) == "dimacs" else write_edgelist(g)
    Path(path).write_text(text)


# -- lists and colourings ------------------------------------------------------


def _vertex_key(key: str, n: int) -> int:
    try:
        v = int(key)
    except ValueError:
        raise FormatError(f"vertex key {key!r} is not an integer") from None
    if not 0 <= v < n:
        raise FormatError(f"vertex {v} outside 0..{n - 1}")
    return v


def lists_from_json(obj: Mapping[str, Any], n: int) -> ListAssignment:
    if "lists" in obj and isinstance(obj["lists"], Mapping):
        obj = obj["lists"]
    named: dict[int, list] = {}
    for key, cols in obj.items():
        if not isinstance(cols, list):
            raise FormatError(f"list for vertex {key} is not an array")
        if any(c is None for c in cols):
            raise FormatError(f"list for vertex {key} contains null (Blank is implicit)")
        named[_vertex_key(key, n)] = cols
    return ListAssignment.from_named(named, n)


def lists_to_json(lists: ListAssignment) -> dict:
    return {str(v): [lists.colour_name(c) for c in sorted(lst)] for v, lst in enumerate(lists.lists)}


def read_lists(path: str | Path, n: int) -> ListAssignment:
    return lists_from_json(json.loads(Path(path).read_text()), n)


def coloring_from_json(obj: Mapping[str, Any], lists: ListAssignment) -> list[Colour]:
    """Accepts a bare ``{"vertex": colour|null}`` map or a run output with a
    ``coloring`` field."""
    if "coloring" in obj and isinstance(obj["coloring"], Mapping):
        obj = obj["coloring"]
    n = len(lists)
    if lists.names is not None:
        ids = {str(name): i for i, name in enumerate(lists.names)}
    else:
        ids = {str(c): c for c in lists.palette}
    sigma: list[Colour] = [BLANK] * n
    seen = set()
    for key, c in obj.items():
        v = _vertex_key(key, n)
        seen.add(v)
        if c is None:
            continue
        if str(c) not in ids:
            raise FormatError(f"vertex {v}: colour {c!r} is not in the palette")
        sigma[v] = ids[str(c)]
    missing = sorted(set(range(n)) - seen)
    if missing:
        raise FormatError(f"no colour given for vertices {missing[:10]}")
    return sigma


def coloring_to_json(sigma: Sequence[Colour], lists: ListAssignment) -> dict:
    return {str(v): lists.colour_name(c) for v, c in enumerate(sigma)}


def read_coloring(path: str | Path, lists: ListAssignment) -> list[Colour]:
    return coloring_from_json(json.loads(Path(path).read_text()), lists)


# -- run artifacts -------------------------------------------------------------


def dumps(obj: Any) -> str:
    """Stable JSON text: fixed key order and formatting, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def config_hash(config: Mapping[str, Any]) -> str:
    text = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def envelope(config: Mapping[str, Any], seed: int, body: Mapping[str, Any]) -> dict:
    """Wrap a result with the provenance fields every output carries."""
    from . import __version__

    return {
        "version": f"listcolor-{__version__}",
        "config_hash": config_hash(config),
        "seed": seed,
        "config": dict(config),
        **body,
    }
