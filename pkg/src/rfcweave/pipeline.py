"""The three-stage extraction pipeline.

Stage 1 summarizes each fragment with retrieved context, stage 2 turns all
summaries into one summary graph in a single call, stage 3 grounds every
transition back into the normalized RFC text.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from . import grounding as grounding_mod
from .config import RunConfig
from .errors import (
    BudgetExceeded,
    EmptyInput,
    ExtractionParseError,
    FixtureMiss,
    RfcweaveError,
)
from .gateway import CompletionRequest, Gateway
from .graph import (
    State,
    SummaryGraph,
    Transition,
    canonicalize_state_name,
    edge_id,
    serialize,
    validate,
)
from .ingest import RfcDocument, load_rfc
from .partition import Fragment, fragments_to_jsonl, partition
from .prompts import (
    TRANSITION_SCHEMA,
    get_template,
    render_context_excerpts,
    render_prompt,
    render_segments,
)
from .retrieval import HashEmbedder, VectorIndex, build_index, top_k

SUMMARIZE_WORKERS = 4


@dataclass(frozen=True)
class SummarySegment:
    segment_id: str
    fragment_id: str
    text: str
    context_fragment_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    rfc_id: str
    status: str  # complete | partial | failed
    config: dict
    artifacts: dict[str, str]
    generated_at: str

    def to_json_obj(self) -> dict:
        return {
            "run_id": self.run_id,
            "rfc_id": self.rfc_id,
            "status": self.status,
            "config": self.config,
            "artifacts": self.artifacts,
            "generated_at": self.generated_at,
        }


@dataclass
class PipelineResult:
    document: RfcDocument
    fragments: tuple[Fragment, ...]
    segments: tuple[SummarySegment, ...]
    graph: SummaryGraph | None
    report: dict
    manifest: RunManifest | None = None


# -- stage 1: summarize -------------------------------------------------------


def summarize_fragments(
    document: RfcDocument,
    fragments: Sequence[Fragment],
    index: VectorIndex,
    gateway: Gateway,
    config: RunConfig,
    skipped: list[dict] | None = None,
) -> list[SummarySegment]:
    """One segment per non-trivial fragment; per-fragment failures are
    recorded in `skipped` and do not abort the stage."""
    embedder = HashEmbedder(dim=config.embedding_dim)
    by_id = {f.fragment_id: f for f in fragments}
    worklist = [f for f in fragments if f.size_estimate > config.triviality_floor]

    def summarize_one(fragment: Fragment) -> SummarySegment:
        query = embedder.embed(fragment.text)
        hits = top_k(index, query, config.retrieval_k, exclude={fragment.fragment_id})
        context_ids = tuple(fid for fid, _score in hits)
        excerpts = [(fid, by_id[fid].text) for fid in context_ids if fid in by_id]
        prompt = render_prompt(
            "summarize",
            {
                "rfc_id": document.rfc_id,
                "section_path": "/".join(fragment.section_path) or "(front matter)",
                "fragment_id": fragment.fragment_id,
                "fragment_text": fragment.text,
                "context_excerpts": render_context_excerpts(excerpts),
            },
        )
        response = gateway.complete(
            CompletionRequest(
                model_id=config.model_id,
                prompt=prompt,
                temperature=config.temperature,
                stage="summarize",
                context_label=fragment.fragment_id,
            )
        )
        return SummarySegment(
            segment_id=f"seg-{fragment.fragment_id}",
            fragment_id=fragment.fragment_id,
            text=response.text,
            context_fragment_ids=context_ids,
        )

    results: list[SummarySegment | None] = [None] * len(worklist)
    first_miss: FixtureMiss | None = None
    with ThreadPoolExecutor(max_workers=SUMMARIZE_WORKERS) as pool:
        futures = {pool.submit(summarize_one, f): i for i, f in enumerate(worklist)}
        for future, i in futures.items():
            try:
                results[i] = future.result()
            except BudgetExceeded:
                # the cap is global, so later fragments cannot succeed either;
                # abort instead of reporting a wall of skipped fragments
                raise
            except RfcweaveError as exc:
                if first_miss is None and isinstance(exc, FixtureMiss):
                    first_miss = exc
                if skipped is not None:
                    skipped.append(
                        {"fragment_id": worklist[i].fragment_id, "error": str(exc)}
                    )
    segments = [seg for seg in results if seg is not None]
    if not segments and first_miss is not None:
        # a lone missing fixture is a skip, but losing the whole stage is
        # fatal; surface the earliest miss so it names where replay broke
        raise first_miss
    return segments


# -- stage 2: extract ----------------------------------------------------------

_FENCE_RE = re.compile(r"^```[a-zA-Z]*\n(.*)\n```\s*$", re.DOTALL)


def _strip_fences(text: str) -> str:
    m = _FENCE_RE.match(text.strip())
    return m.group(1) if m else text


def _parse_extract_json(text: str) -> dict:
    data = json.loads(_strip_fences(text))
    if not isinstance(data, dict):
        raise ValueError("top level must be a JSON object")
    if not isinstance(data.get("states"), list) or not isinstance(
        data.get("transitions"), list
    ):
        raise ValueError("object must contain 'states' and 'transitions' lists")
    return data


def _coerce_origin(raw: str, warnings: list[str]) -> str:
    origin = str(raw).strip().lower().replace("-", "_").replace(" ", "_")
    if origin in ("fsm_section", "other_text", "inferred", "recommended"):
        return origin
    warnings.append(f"unknown origin {raw!r} coerced to other_text")
    return "other_text"


def extract_graph(
    segments: Sequence[SummarySegment],
    gateway: Gateway,
    config: RunConfig,
    rfc_id: str,
    report: dict | None = None,
) -> SummaryGraph:
    """Single whole-document extraction call; returns an ungrounded graph."""
    if not segments:
        raise EmptyInput("extraction needs at least one summary segment")
    report = report if report is not None else {}
    warnings: list[str] = report.setdefault("warnings", [])
    dropped: list[dict] = report.setdefault("dropped_transitions", [])
    merged: list[dict] = report.setdefault("merged_duplicates", [])

    prompt = render_prompt(
        "extract",
        {
            "rfc_id": rfc_id,
            "schema": TRANSITION_SCHEMA,
            "segments": render_segments([(s.segment_id, s.text) for s in segments]),
        },
        version=config.prompt_version,
    )
    response = gateway.complete(
        CompletionRequest(
            model_id=config.model_id,
            prompt=prompt,
            temperature=config.temperature,
            stage="extract",
            context_label=rfc_id,
        )
    )
    raw = response.text
    try:
        data = _parse_extract_json(raw)
    except (ValueError, json.JSONDecodeError) as first_error:
        report["repair_calls"] = report.get("repair_calls", 0) + 1
        repair_prompt = render_prompt(
            "repair",
            {
                "problem": str(first_error),
                "previous_output": raw,
                "schema": TRANSITION_SCHEMA,
            },
        )
        repair_response = gateway.complete(
            CompletionRequest(
                model_id=config.model_id,
                prompt=repair_prompt,
                temperature=config.temperature,
                stage="extract",
                context_label=f"{rfc_id} (repair)",
            )
        )
        raw = repair_response.text
        try:
            data = _parse_extract_json(raw)
        except (ValueError, json.JSONDecodeError) as exc:
            raise ExtractionParseError(
                f"extraction output invalid after repair: {exc}", raw_response=raw
            ) from exc

    known_segments = {s.segment_id for s in segments}
    states: dict[str, State] = {}
    for s in data["states"]:
        if not isinstance(s, dict) or not s.get("name"):
            warnings.append(f"malformed state entry skipped: {s!r}")
            continue
        name = canonicalize_state_name(str(s["name"]))
        kind = str(s.get("kind", "normal")).strip().lower()
        if kind not in ("normal", "grouped", "any"):
            warnings.append(f"state {name}: unknown kind {kind!r} coerced to normal")
            kind = "normal"
        members = tuple(
            canonicalize_state_name(str(m)) for m in s.get("members", []) if str(m).strip()
        )
        if kind != "grouped":
            members = ()
        if name in states:
            warnings.append(f"duplicate state {name} merged")
            continue
        states[name] = State(
            name=name, kind=kind, members=members, description=str(s.get("description", ""))
        )

    transitions: dict[tuple[str, str, str], Transition] = {}
    for t in data["transitions"]:
        if not isinstance(t, dict) or not t.get("source") or not t.get("target"):
            warnings.append(f"malformed transition entry skipped: {t!r}")
            continue
        source = canonicalize_state_name(str(t["source"]))
        target = canonicalize_state_name(str(t["target"]))
        event = str(t.get("event", "")).strip()
        citations = [str(c) for c in t.get("citations", []) if str(c) in known_segments]
        bad_citations = [str(c) for c in t.get("citations", []) if str(c) not in known_segments]
        if bad_citations:
            warnings.append(
                f"transition {source}->{target}: unknown citations {bad_citations} ignored"
            )
        if not citations:
            dropped.append(
                {
                    "source": source,
                    "target": target,
                    "event": event,
                    "reason": "no valid segment citation",
                }
            )
            continue
        origin = _coerce_origin(t.get("origin", "other_text"), warnings)
        reasoning = str(t.get("reasoning", ""))
        if origin == "inferred" and not reasoning.strip():
            warnings.append(
                f"inferred transition {source}->{target} arrived without reasoning"
            )
            reasoning = "(model gave no reasoning)"
        for endpoint in (source, target):
            if endpoint not in states:
                warnings.append(f"state {endpoint} added from transition endpoints")
                states[endpoint] = State(name=endpoint, kind="normal")
        new = Transition(
            source=source,
            target=target,
            event=event,
            conditions=tuple(str(c) for c in t.get("conditions", [])),
            actions=tuple(str(a) for a in t.get("actions", [])),
            origin=origin,
            reasoning=reasoning,
            provenance=tuple((sid, ()) for sid in dict.fromkeys(citations)),
            grouped_members=tuple(
                canonicalize_state_name(str(m))
                for m in t.get("grouped_members", [])
                if str(m).strip()
            ),
            ungrounded=True,
        )
        key = (source, target, event)
        if key in transitions:
            old = transitions[key]
            merged.append({"source": source, "target": target, "event": event})
            seen_sids = {sid for sid, _ in old.provenance}
            combined_prov = old.provenance + tuple(
                (sid, ()) for sid, _ in new.provenance if sid not in seen_sids
            )
            transitions[key] = replace(
                old,
                conditions=tuple(dict.fromkeys(old.conditions + new.conditions)),
                actions=tuple(dict.fromkeys(old.actions + new.actions)),
                provenance=combined_prov,
                reasoning=old.reasoning or new.reasoning,
            )
        else:
            transitions[key] = new

    return SummaryGraph(
        rfc_id=rfc_id,
        states=tuple(sorted(states.values(), key=lambda s: s.name)),
        transitions=tuple(
            sorted(transitions.values(), key=lambda t: (t.source, t.target, t.event))
        ),
    )


# -- stage 3: ground -----------------------------------------------------------


def _ground_prompt_material(
    graph: SummaryGraph,
    segments: Sequence[SummarySegment],
    fragments: Sequence[Fragment],
) -> str:
    seg_by_id = {s.segment_id: s for s in segments}
    frag_by_id = {f.fragment_id: f for f in fragments}
    blocks: list[str] = []
    listed_fragments: dict[str, str] = {}
    for t in graph.transitions:
        tid = edge_id(t.source, t.target, t.event)
        cited = [sid for sid, _ in t.provenance]
        lines = [f'transition {tid}: {t.source} -> {t.target} on "{t.event}"']
        lines.append(f"  cited segments: {', '.join(cited) or '(none)'}")
        for sid in cited:
            seg = seg_by_id.get(sid)
            if seg is None:
                continue
            frag = frag_by_id.get(seg.fragment_id)
            if frag is not None and frag.fragment_id not in listed_fragments:
                listed_fragments[frag.fragment_id] = frag.text
        blocks.append("\n".join(lines))
    material = ["\n".join(blocks), "", "Source text by fragment id:"]
    for fid, text in listed_fragments.items():
        material.append(f"--- {fid} ---\n{text}")
    return "\n\n".join(material)


def ground_edges(
    graph: SummaryGraph,
    segments: Sequence[SummarySegment],
    document: RfcDocument,
    gateway: Gateway,
    config: RunConfig,
    fragments: Sequence[Fragment] = (),
    report: dict | None = None,
) -> SummaryGraph:
    """One grounding call; anchors returned passages and flags failures.

    Transition multiset is preserved, only provenance and the ungrounded
    flag change."""
    report = report if report is not None else {}
    warnings: list[str] = report.setdefault("warnings", [])
    unanchored: list[dict] = report.setdefault("unanchored_passages", [])
    if not graph.transitions:
        return graph

    prompt = render_prompt(
        "ground",
        {
            "rfc_id": graph.rfc_id,
            "transitions": _ground_prompt_material(graph, segments, fragments),
        },
    )
    response = gateway.complete(
        CompletionRequest(
            model_id=config.model_id,
            prompt=prompt,
            temperature=config.temperature,
            stage="ground",
            context_label=graph.rfc_id,
        )
    )
    try:
        data = json.loads(_strip_fences(response.text))
        if not isinstance(data, dict):
            raise ValueError("top level must be a JSON object")
    except (ValueError, json.JSONDecodeError) as exc:
        raise ExtractionParseError(
            f"grounding output invalid: {exc}", raw_response=response.text
        ) from exc

    known_tids = {
        edge_id(t.source, t.target, t.event) for t in graph.transitions
    }
    for tid in data:
        if tid not in known_tids:
            warnings.append(f"grounding returned unknown transition id {tid!r}")

    new_transitions = []
    for t in graph.transitions:
        tid = edge_id(t.source, t.target, t.event)
        per_segment = data.get(tid, {})
        if not isinstance(per_segment, dict):
            warnings.append(f"grounding for {tid} is not an object; ignored")
            per_segment = {}
        provenance = []
        any_spans = False
        for sid, _old in t.provenance:
            passages = per_segment.get(sid, [])
            if not isinstance(passages, list):
                passages = []
            spans, misses = grounding_mod.anchor_passages(
                [str(p) for p in passages],
                document.normalized_text,
                config.fuzzy_threshold,
            )
            for miss in misses:
                unanchored.append({"edge_id": tid, "segment_id": sid, "passage": miss})
            if spans:
                any_spans = True
            provenance.append((sid, spans))
        new_transitions.append(
            replace(t, provenance=tuple(provenance), ungrounded=not any_spans)
        )
    return replace(graph, transitions=tuple(new_transitions))


# -- orchestration ---------------------------------------------------------------


def config_digest(config: RunConfig) -> str:
    relevant = {
        "model_id": config.model_id,
        "prompt_version": config.prompt_version,
        "max_fragment_size": config.max_fragment_size,
        "triviality_floor": config.triviality_floor,
        "retrieval_k": config.retrieval_k,
        "embedding_dim": config.embedding_dim,
        "temperature": config.temperature,
        "fuzzy_threshold": config.fuzzy_threshold,
    }
    blob = json.dumps(relevant, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def make_gateway(config: RunConfig, transport=None, sleeper=None, clock=None) -> Gateway:
    kwargs: dict = {}
    if sleeper is not None:
        kwargs["sleeper"] = sleeper
    if clock is not None:
        kwargs["clock"] = clock
    return Gateway(
        mode=config.gateway_mode,
        fixtures_dir=config.fixtures_dir,
        api_base=config.api_base,
        api_key=config.api_key,
        request_budget=config.request_budget,
        max_retries=config.max_retries,
        retry_base_delay=config.retry_base_delay,
        transport=transport,
        **kwargs,
    )


def _generated_at(gateway: Gateway) -> str:
    if gateway.mode == "replay":
        # the newest fixture timestamp: stable across replay runs
        return max(gateway.used_fixture_times, default="")
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _segments_jsonl(segments: Sequence[SummarySegment]) -> str:
    lines = [
        json.dumps(
            {
                "segment_id": s.segment_id,
                "fragment_id": s.fragment_id,
                "text": s.text,
                "context_fragment_ids": list(s.context_fragment_ids),
            },
            sort_keys=True,
            ensure_ascii=True,
        )
        for s in segments
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def _fragments_full_jsonl(fragments: Sequence[Fragment]) -> str:
    lines = [
        json.dumps(
            {
                "fragment_id": f.fragment_id,
                "section_path": list(f.section_path),
                "span": list(f.span),
                "size_estimate": f.size_estimate,
                "contains_diagram": f.contains_diagram,
                "text": f.text,
            },
            sort_keys=True,
            ensure_ascii=True,
        )
        for f in fragments
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def run_pipeline(
    source: str,
    config: RunConfig,
    out_dir: str | Path | None = None,
    gateway: Gateway | None = None,
    fetch=None,
) -> PipelineResult:
    """ingest -> partition -> index -> summarize -> extract -> ground.

    Artifacts are persisted even when a late stage fails, so a broken run
    can be inspected; the manifest then carries status "failed"."""
    gateway = gateway or make_gateway(config)
    document = load_rfc(source, cache_dir=config.cache_dir or None, fetch=fetch)
    fragments = partition(document, config.max_fragment_size)
    embedder = HashEmbedder(dim=config.embedding_dim)
    index = build_index(fragments, embedder)

    run_id = f"{document.rfc_id.lower()}-{config_digest(config)[:8]}"
    report: dict = {
        "rfc_id": document.rfc_id,
        "run_id": run_id,
        "warnings": [],
        "dropped_transitions": [],
        "merged_duplicates": [],
        "unanchored_passages": [],
        "repair_calls": 0,
    }
    skipped: list[dict] = []
    segments: list[SummarySegment] = []
    graph: SummaryGraph | None = None
    failure: Exception | None = None

    try:
        segments = summarize_fragments(
            document, fragments, index, gateway, config, skipped=skipped
        )
        graph = extract_graph(segments, gateway, config, document.rfc_id, report)
        graph = ground_edges(
            graph, segments, document, gateway, config, fragments, report
        )
    except RfcweaveError as exc:
        failure = exc

    status = "failed" if failure else ("partial" if skipped else "complete")
    generated_at = _generated_at(gateway)
    if graph is not None:
        graph = replace(
            graph,
            meta=tuple(
                sorted(
                    {
                        "rfc_id": document.rfc_id,
                        "run_id": run_id,
                        "model_id": config.model_id,
                        "template_summarize": "v1",
                        "template_extract": config.prompt_version,
                        "template_ground": "v1",
                        "generated_at": generated_at,
                        "status": status,
                    }.items()
                )
            ),
        )

    trivial = [
        f.fragment_id for f in fragments if f.size_estimate <= config.triviality_floor
    ]
    report.update(
        {
            "status": status,
            "counts": {
                "fragments": len(fragments),
                "trivial_fragments": len(trivial),
                "segments": len(segments),
                "summarize_calls": len(segments) + len(skipped),
                "extract_calls": 1 if (graph is not None or failure) and segments else 0,
                "ground_calls": 1 if graph is not None and graph.transitions else 0,
                "repair_calls": report.get("repair_calls", 0),
                "states": len(graph.states) if graph else 0,
                "transitions": len(graph.transitions) if graph else 0,
            },
            "budget": {
                "limit": gateway.request_budget,
                "used": gateway.calls_used,
                "replay_hits": gateway.replay_hits,
            },
            "skipped_fragments": skipped,
            "ungrounded_edges": sorted(
                edge_id(t.source, t.target, t.event)
                for t in (graph.transitions if graph else ())
                if t.ungrounded
            ),
            "validation": [
                {"code": v.code, "severity": v.severity, "message": v.message, "path": v.path}
                for v in (validate(graph) if graph else [])
            ],
        }
    )
    if failure is not None:
        report["error"] = f"{type(failure).__name__}: {failure}"

    manifest = None
    if out_dir is not None:
        run_dir = Path(out_dir) / run_id
        run_dir.mkdir(parents=True, exist_ok=True)
        artifacts = {
            "fragments": "fragments.jsonl",
            "segments": "segments.jsonl",
            "report": "report.json",
            "rfc": "rfc.txt",
        }
        (run_dir / "fragments.jsonl").write_text(
            _fragments_full_jsonl(fragments), encoding="utf-8"
        )
        (run_dir / "segments.jsonl").write_text(
            _segments_jsonl(segments), encoding="utf-8"
        )
        (run_dir / "rfc.txt").write_text(document.normalized_text, encoding="utf-8")
        if graph is not None:
            artifacts["graph"] = "graph.json"
            (run_dir / "graph.json").write_text(serialize(graph), encoding="utf-8")
        (run_dir / "report.json").write_text(
            json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True) + "\n",
            encoding="utf-8",
        )
        manifest = RunManifest(
            run_id=run_id,
            rfc_id=document.rfc_id,
            status=status,
            config=config.to_dict(),
            artifacts=artifacts,
            generated_at=generated_at,
        )
        (run_dir / "manifest.json").write_text(
            json.dumps(manifest.to_json_obj(), sort_keys=True, indent=2, ensure_ascii=True)
            + "\n",
            encoding="utf-8",
        )

    result = PipelineResult(
        document=document,
        fragments=fragments,
        segments=tuple(segments),
        graph=graph,
        report=report,
        manifest=manifest,
    )
    if failure is not None:
        raise failure
    return result
