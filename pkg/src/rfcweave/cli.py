"""Command-line entry points.

Subcommands: extract (full pipeline over one RFC), parse-diagram (reference
graph from ASCII figures), diff (extracted vs reference), serve (local HTTP
service for the explorer UI).

Exit codes: 0 success, 2 config or input error, 3 fixture miss,
4 provider or budget error.  `diff` exits 1 when anything is missing.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .asciifsm import merge_reference_graphs, parse_diagram, to_summary_graph
from .config import load_config
from .diffing import DiffOptions, diff, render_report
from .dot import export_dot
from .errors import (
    BudgetExceeded,
    CitationViolation,
    ExtractionParseError,
    FixtureMiss,
    ProviderError,
    ProviderUnavailable,
    RfcweaveError,
)
from .graph import deserialize, serialize
from .ingest import load_rfc
from .partition import detect_diagram
from .pipeline import run_pipeline
from .service import create_app

_PROVIDER_ERRORS = (
    ProviderError,
    ProviderUnavailable,
    BudgetExceeded,
    ExtractionParseError,
    CitationViolation,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfcweave",
        description="Summarize RFC state machines into grounded, explorable graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser(
        "extract", help="run the full pipeline over an RFC (path or number)"
    )
    p_extract.add_argument("source", help="RFC text file, or an RFC number like 9293")
    p_extract.add_argument("--config", help="JSON config file")
    p_extract.add_argument(
        "--mode", choices=["replay", "record", "live"], help="gateway mode"
    )
    p_extract.add_argument("--out", default="runs", help="runs directory (default: runs)")
    p_extract.add_argument("--budget", type=int, help="max live/record model requests")
    p_extract.add_argument("--fixtures", help="fixture directory for replay/record")
    p_extract.add_argument("--model", help="model id")
    p_extract.add_argument("--cache", help="RFC download cache directory")
    p_extract.add_argument("--prompt-version", help="extraction template version (v1, v2)")
    p_extract.add_argument("--api-base", help="provider base URL for live/record")
    p_extract.add_argument("--api-key", help="provider API key for live/record")

    p_parse = sub.add_parser(
        "parse-diagram", help="parse ASCII state diagrams into a reference graph"
    )
    p_parse.add_argument("source", help="RFC text file, or an RFC number")
    p_parse.add_argument("--section", help="dotted section number to search, e.g. 3.3.2")
    p_parse.add_argument("--out", default=".", help="output directory (default: .)")
    p_parse.add_argument("--cache", help="RFC download cache directory")

    p_diff = sub.add_parser("diff", help="compare an extracted graph with a reference")
    p_diff.add_argument("extracted", help="extracted graph.json")
    p_diff.add_argument("reference", help="reference graph.json")
    p_diff.add_argument("--aliases", help="JSON alias file: {nodes: {...}, events: {...}}")
    p_diff.add_argument(
        "--format",
        choices=["text", "json", "markdown-table"],
        default="text",
        help="report rendering (default: text)",
    )
    p_diff.add_argument("--label", default="", help="row label for markdown-table output")

    p_serve = sub.add_parser("serve", help="serve run artifacts and the explorer UI")
    p_serve.add_argument("--runs", default="runs", help="runs directory (default: runs)")
    p_serve.add_argument("--static", help="static UI directory (default: frontend/dist if present)")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def _extract_overrides(args: argparse.Namespace) -> dict:
    mapping = {
        "mode": "gateway_mode",
        "budget": "request_budget",
        "fixtures": "fixtures_dir",
        "model": "model_id",
        "cache": "cache_dir",
        "prompt_version": "prompt_version",
        "api_base": "api_base",
        "api_key": "api_key",
    }
    overrides = {}
    for flag, key in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return overrides


def cmd_extract(args: argparse.Namespace) -> int:
    config = load_config(args.config, env=os.environ, overrides=_extract_overrides(args))
    result = run_pipeline(args.source, config, out_dir=args.out)
    manifest = result.manifest
    graph = result.graph
    print(f"run {manifest.run_id}: {manifest.status}")
    print(
        f"states: {len(graph.states) if graph else 0}  "
        f"transitions: {len(graph.transitions) if graph else 0}  "
        f"ungrounded: {len(result.report['ungrounded_edges'])}"
    )
    if result.report["skipped_fragments"]:
        print(f"skipped fragments: {len(result.report['skipped_fragments'])}")
    print(f"artifacts: {Path(args.out) / manifest.run_id}")
    return 0


def cmd_parse_diagram(args: argparse.Namespace) -> int:
    config = load_config(env=os.environ, overrides={"cache_dir": args.cache} if args.cache else None)
    document = load_rfc(args.source, cache_dir=config.cache_dir or None)
    base = 0
    text = document.normalized_text
    if args.section:
        node = document.find_section(args.section)
        if node is None:
            print(f"error: section {args.section} not found", file=sys.stderr)
            return 2
        base, end = node.span
        text = document.normalized_text[base:end]

    _, spans = detect_diagram(text)
    graphs = []
    for start, end in spans:
        try:
            fsm = parse_diagram(text[start:end])
        except RfcweaveError as exc:
            print(f"warning: figure at offset {base + start} skipped: {exc}", file=sys.stderr)
            continue
        graphs.append(
            to_summary_graph(
                fsm,
                document.rfc_id,
                document_text=document.normalized_text,
                span_offset=base + start,
            )
        )
    if not graphs:
        where = f"section {args.section}" if args.section else "document"
        print(f"error: no parseable state diagram in {where}", file=sys.stderr)
        return 2

    merged, duplicates = merge_reference_graphs(graphs, document.rfc_id)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{document.rfc_id.lower()}-reference"
    json_path = out_dir / f"{stem}.json"
    dot_path = out_dir / f"{stem}.dot"
    json_path.write_text(serialize(merged), encoding="utf-8")
    dot_path.write_text(export_dot(merged), encoding="utf-8")
    print(f"parsed {len(graphs)} figure(s), dropped {duplicates} duplicate transition(s)")
    print(f"states: {len(merged.states)}  transitions: {len(merged.transitions)}")
    print(f"wrote {json_path} and {dot_path}")
    return 0


def cmd_diff(args: argparse.Namespace) -> int:
    extracted = deserialize(Path(args.extracted).read_text(encoding="utf-8"))
    reference = deserialize(Path(args.reference).read_text(encoding="utf-8"))
    options = DiffOptions.from_alias_file(args.aliases) if args.aliases else DiffOptions()
    report = diff(extracted, reference, options)
    label = args.label or extracted.rfc_id
    sys.stdout.write(render_report(report, args.format, label=label))
    missing = report.counts["missing_nodes"] + report.counts["missing_edges"]
    return 0 if missing == 0 else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    static = args.static
    if static is None and Path("frontend/dist").is_dir():
        static = "frontend/dist"
    app = create_app(args.runs, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "extract": cmd_extract,
        "parse-diagram": cmd_parse_diagram,
        "diff": cmd_diff,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except FixtureMiss as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _PROVIDER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except RfcweaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
