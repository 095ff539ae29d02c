"""List colouring of triangle-free and K_r-free graphs by recursive
neighbourhood recolouring, with completion phases and a validation lab."""

from .coloring import BLANK, ListAssignment, init_blank, is_proper_full
from .fix import FixParams, Transcript, fix, reconstruct, run_pipeline
from .fix2 import fix2, run_pipeline_kr
from .flaws import Flaw, FlawParams, Variant
from .graph import Graph, build_graph, generate

__version__ = "0.1.0"

__all__ = [
    "BLANK",
    "Flaw",
    "FixParams",
    "FlawParams",
    "Graph",
    "ListAssignment",
    "Transcript",
    "Variant",
    "build_graph",
    "fix",
    "fix2",
    "generate",
    "init_blank",
    "is_proper_full",
    "reconstruct",
    "run_pipeline",
    "run_pipeline_kr",
]
