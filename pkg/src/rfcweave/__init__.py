"""Grounded state-machine summaries of RFC protocol documents.

The pipeline ingests an RFC, partitions it into retrieval-sized fragments,
summarizes and extracts a transition graph through a record/replay model
gateway, anchors every edge back to verbatim RFC text, and serves the result
to a browser UI.  A deterministic ASCII-diagram parser provides reference
graphs for evaluating extraction quality.
"""

from .config import RunConfig, load_config
from .diffing import DiffOptions, DiffReport, diff, render_report
from .graph import (
    GroundedSpan,
    State,
    SummaryGraph,
    Transition,
    Violation,
    canonicalize_state_name,
    deserialize,
    edge_id,
    expand_groups,
    serialize,
    validate,
)
from .ingest import RfcDocument, SectionNode, load_rfc, normalize
from .partition import Fragment, detect_diagram, estimate_size, partition
from .pipeline import PipelineResult, RunManifest, SummarySegment, run_pipeline
from .asciifsm import AsciiFsm, FsmEdge, FsmNode, merge_reference_graphs, parse_diagram, to_summary_graph
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "AsciiFsm",
    "DiffOptions",
    "DiffReport",
    "Fragment",
    "FsmEdge",
    "FsmNode",
    "GroundedSpan",
    "PipelineResult",
    "RfcDocument",
    "RunConfig",
    "RunManifest",
    "SectionNode",
    "State",
    "SummaryGraph",
    "SummarySegment",
    "Transition",
    "Violation",
    "__version__",
    "canonicalize_state_name",
    "create_app",
    "deserialize",
    "detect_diagram",
    "diff",
    "edge_id",
    "estimate_size",
    "expand_groups",
    "load_config",
    "load_rfc",
    "merge_reference_graphs",
    "normalize",
    "parse_diagram",
    "partition",
    "render_report",
    "run_pipeline",
    "serialize",
    "to_summary_graph",
    "validate",
]
