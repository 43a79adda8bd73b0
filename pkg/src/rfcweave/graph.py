"""Summary graph model: states, rich transitions, validation, serialization.

A summary graph is an FSM enriched with grouped and wildcard states, per-
transition conditions/actions, an origin class saying where the knowledge
came from, and grounded provenance back into the RFC text.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable

from .errors import EmptyName, SchemaError

STATE_KINDS = ("normal", "grouped", "any")
ORIGIN_CLASSES = ("fsm_section", "other_text", "inferred", "recommended")
MATCH_KINDS = ("exact", "fuzzy")

_NAME_SEP_RE = re.compile(r"[\s_]+")


@dataclass(frozen=True)
class GroundedSpan:
    """An exact character range in normalized RFC text justifying an edge."""

    span: tuple[int, int]
    quote: str
    match_kind: str  # exact | fuzzy
    similarity: float


@dataclass(frozen=True)
class State:
    name: str
    kind: str = "normal"  # normal | grouped | any
    members: tuple[str, ...] = ()
    description: str = ""


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    event: str
    conditions: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()
    origin: str = "other_text"
    reasoning: str = ""
    provenance: tuple[tuple[str, tuple[GroundedSpan, ...]], ...] = ()
    grouped_members: tuple[str, ...] = ()
    ungrounded: bool = False


@dataclass(frozen=True)
class SummaryGraph:
    rfc_id: str
    states: tuple[State, ...] = ()
    transitions: tuple[Transition, ...] = ()
    meta: tuple[tuple[str, str], ...] = ()

    def state(self, name: str) -> State | None:
        for s in self.states:
            if s.name == name:
                return s
        return None


@dataclass(frozen=True)
class Violation:
    code: str
    severity: str  # error | warning
    message: str
    path: str = ""


def canonicalize_state_name(raw: str) -> str:
    """Uppercase, whitespace/underscore runs to single hyphens, edge
    punctuation stripped."""
    if raw is None or raw == "":
        raise EmptyName("state name is empty")
    name = _NAME_SEP_RE.sub("-", raw.strip()).upper()
    name = name.strip("-")
    name = re.sub(r"^[^0-9A-Z]+|[^0-9A-Z]+$", "", name)
    if name == "":
        raise EmptyName(f"state name {raw!r} is empty after canonicalization")
    return name


def edge_id(source: str, target: str, event: str) -> str:
    """Stable id for one transition; layouts and URLs key on this."""
    preimage = "\x1f".join((source, target, event)).encode("utf-8")
    return "e-" + hashlib.sha256(preimage).hexdigest()[:12]


def transition_id(t: Transition) -> str:
    return edge_id(t.source, t.target, t.event)


def validate(graph: SummaryGraph) -> list[Violation]:
    """Every structural defect, as machine-readable codes; never raises."""
    out: list[Violation] = []
    names: set[str] = set()
    for i, s in enumerate(graph.states):
        path = f"states[{i}]"
        if s.name in names:
            out.append(Violation("DUPLICATE_STATE", "error", f"duplicate state {s.name}", path))
        names.add(s.name)
        if s.kind not in STATE_KINDS:
            out.append(Violation("BAD_STATE_KIND", "error", f"unknown kind {s.kind!r}", path))
        if s.kind == "grouped" and not s.members:
            out.append(Violation("GROUPED_WITHOUT_MEMBERS", "error", f"grouped state {s.name} has no members", path))
        if s.kind != "grouped" and s.members:
            out.append(Violation("MEMBERS_ON_NON_GROUPED", "error", f"state {s.name} of kind {s.kind} has members", path))

    seen_triples: set[tuple[str, str, str]] = set()
    for i, t in enumerate(graph.transitions):
        path = f"transitions[{i}]"
        if t.source not in names:
            out.append(Violation("UNKNOWN_SOURCE", "error", f"source {t.source!r} is not a state", path))
        if t.target not in names:
            out.append(Violation("UNKNOWN_TARGET", "error", f"target {t.target!r} is not a state", path))
        if t.origin not in ORIGIN_CLASSES:
            out.append(Violation("BAD_ORIGIN", "error", f"unknown origin {t.origin!r}", path))
        if t.origin == "inferred" and not t.reasoning.strip():
            out.append(Violation("MISSING_REASONING", "error", f"inferred transition {t.source}->{t.target} lacks reasoning", path))
        if not t.provenance and not t.ungrounded:
            out.append(Violation("EMPTY_PROVENANCE", "error", f"transition {t.source}->{t.target} has no provenance and is not flagged ungrounded", path))
        triple = (t.source, t.target, t.event)
        if triple in seen_triples:
            out.append(Violation("DUPLICATE_TRANSITION", "error", f"duplicate transition {triple}", path))
        seen_triples.add(triple)
        if t.event.strip() == "":
            out.append(Violation("EMPTY_EVENT", "warning", f"transition {t.source}->{t.target} has an empty event label", path))
        for j, (segment_id, spans) in enumerate(t.provenance):
            for k, g in enumerate(spans):
                if g.match_kind not in MATCH_KINDS:
                    out.append(Violation("BAD_MATCH_KIND", "error", f"unknown match kind {g.match_kind!r}", f"{path}.provenance[{j}][{k}]"))
                if (g.match_kind == "exact") != (g.similarity == 1.0):
                    out.append(Violation("MATCH_KIND_SIMILARITY", "error", "exact matches must have similarity 1.0 and vice versa", f"{path}.provenance[{j}][{k}]"))
    return out


def validation_errors(graph: SummaryGraph) -> list[Violation]:
    return [v for v in validate(graph) if v.severity == "error"]


# -- canonical JSON ----------------------------------------------------------


def _span_to_json(g: GroundedSpan) -> dict[str, Any]:
    return {
        "span": [g.span[0], g.span[1]],
        "quote": g.quote,
        "match_kind": g.match_kind,
        "similarity": g.similarity,
    }


def _transition_to_json(t: Transition) -> dict[str, Any]:
    return {
        "source": t.source,
        "target": t.target,
        "event": t.event,
        "conditions": list(t.conditions),
        "actions": list(t.actions),
        "origin": t.origin,
        "reasoning": t.reasoning,
        "provenance": [
            {"segment_id": sid, "spans": [_span_to_json(g) for g in spans]}
            for sid, spans in t.provenance
        ],
        "grouped_members": list(t.grouped_members),
        "ungrounded": t.ungrounded,
    }


def to_json_obj(graph: SummaryGraph) -> dict[str, Any]:
    return {
        "rfc_id": graph.rfc_id,
        "states": [
            {
                "name": s.name,
                "kind": s.kind,
                "members": list(s.members),
                "description": s.description,
            }
            for s in sorted(graph.states, key=lambda s: s.name)
        ],
        "transitions": [
            _transition_to_json(t)
            for t in sorted(
                graph.transitions, key=lambda t: (t.source, t.target, t.event)
            )
        ],
        "meta": {k: v for k, v in graph.meta},
    }


def serialize(graph: SummaryGraph) -> str:
    """Canonical bytes: sorted keys, states by name, transitions by triple."""
    errors = validation_errors(graph)
    if errors:
        first = errors[0]
        raise SchemaError(f"cannot serialize invalid graph: {first.code} at {first.path}: {first.message}")
    return json.dumps(to_json_obj(graph), sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise SchemaError(f"{path}: {message}")


def _parse_span(obj: Any, path: str) -> GroundedSpan:
    _expect(isinstance(obj, dict), path, "grounded span must be an object")
    for key in ("span", "quote", "match_kind", "similarity"):
        _expect(key in obj, path, f"missing required field {key!r}")
    span = obj["span"]
    _expect(
        isinstance(span, list) and len(span) == 2 and all(isinstance(x, int) for x in span),
        f"{path}.span",
        "span must be a pair of integers",
    )
    return GroundedSpan(
        span=(span[0], span[1]),
        quote=str(obj["quote"]),
        match_kind=str(obj["match_kind"]),
        similarity=float(obj["similarity"]),
    )


def _parse_str_list(obj: Any, path: str) -> tuple[str, ...]:
    _expect(isinstance(obj, list) and all(isinstance(x, str) for x in obj), path, "must be a list of strings")
    return tuple(obj)


def from_json_obj(data: Any) -> SummaryGraph:
    _expect(isinstance(data, dict), "$", "graph must be a JSON object")
    for key in ("rfc_id", "states", "transitions"):
        _expect(key in data, "$", f"missing required field {key!r}")
    _expect(isinstance(data["states"], list), "$.states", "must be a list")
    _expect(isinstance(data["transitions"], list), "$.transitions", "must be a list")

    states = []
    for i, s in enumerate(data["states"]):
        path = f"states[{i}]"
        _expect(isinstance(s, dict), path, "state must be an object")
        _expect("name" in s, path, "missing required field 'name'")
        states.append(
            State(
                name=str(s["name"]),
                kind=str(s.get("kind", "normal")),
                members=_parse_str_list(s.get("members", []), f"{path}.members"),
                description=str(s.get("description", "")),
            )
        )

    transitions = []
    for i, t in enumerate(data["transitions"]):
        path = f"transitions[{i}]"
        _expect(isinstance(t, dict), path, "transition must be an object")
        for key in ("source", "target", "event"):
            _expect(key in t, path, f"missing required field {key!r}")
        provenance = []
        prov = t.get("provenance", [])
        _expect(isinstance(prov, list), f"{path}.provenance", "must be a list")
        for j, p in enumerate(prov):
            ppath = f"{path}.provenance[{j}]"
            _expect(isinstance(p, dict) and "segment_id" in p and "spans" in p, ppath, "must be an object with segment_id and spans")
            spans = tuple(
                _parse_span(g, f"{ppath}.spans[{k}]") for k, g in enumerate(p["spans"])
            )
            provenance.append((str(p["segment_id"]), spans))
        transitions.append(
            Transition(
                source=str(t["source"]),
                target=str(t["target"]),
                event=str(t["event"]),
                conditions=_parse_str_list(t.get("conditions", []), f"{path}.conditions"),
                actions=_parse_str_list(t.get("actions", []), f"{path}.actions"),
                origin=str(t.get("origin", "other_text")),
                reasoning=str(t.get("reasoning", "")),
                provenance=tuple(provenance),
                grouped_members=_parse_str_list(t.get("grouped_members", []), f"{path}.grouped_members"),
                ungrounded=bool(t.get("ungrounded", False)),
            )
        )

    meta_obj = data.get("meta", {})
    _expect(isinstance(meta_obj, dict), "$.meta", "must be an object")
    meta = tuple(sorted((str(k), str(v)) for k, v in meta_obj.items()))
    return SummaryGraph(
        rfc_id=str(data["rfc_id"]),
        states=tuple(sorted(states, key=lambda s: s.name)),
        transitions=tuple(
            sorted(transitions, key=lambda t: (t.source, t.target, t.event))
        ),
        meta=meta,
    )


def deserialize(text: str) -> SummaryGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$: not valid JSON: {exc}") from exc
    return from_json_obj(data)


def expand_groups(graph: SummaryGraph) -> SummaryGraph:
    """Materialize grouped states into per-member edges.

    Members become normal states (added when absent); each transition
    touching a grouped state is duplicated per member.  Wildcard states are
    left alone; the diff layer owns their expansion policy.
    """
    grouped = {s.name: s for s in graph.states if s.kind == "grouped"}
    if not grouped:
        return graph
    states: dict[str, State] = {}
    for s in graph.states:
        if s.kind == "grouped":
            continue
        states[s.name] = s
    for g in grouped.values():
        for member in g.members:
            states.setdefault(member, State(name=member, kind="normal"))

    transitions: dict[tuple[str, str, str], Transition] = {}

    def add(t: Transition) -> None:
        key = (t.source, t.target, t.event)
        if key not in transitions:
            transitions[key] = t

    for t in graph.transitions:
        sources = [t.source]
        if t.source in grouped:
            sources = list(t.grouped_members or grouped[t.source].members)
        targets = [t.target]
        if t.target in grouped:
            targets = list(grouped[t.target].members)
        for src in sources:
            for tgt in targets:
                states.setdefault(src, State(name=src, kind="normal"))
                states.setdefault(tgt, State(name=tgt, kind="normal"))
                add(replace(t, source=src, target=tgt, grouped_members=()))

    ordered_states = tuple(sorted(states.values(), key=lambda s: s.name))
    ordered_transitions = tuple(
        sorted(transitions.values(), key=lambda t: (t.source, t.target, t.event))
    )
    return replace(graph, states=ordered_states, transitions=ordered_transitions)
