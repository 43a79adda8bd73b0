"""Semantic diff between an extracted summary graph and a reference FSM.

Matching is a maximum-cardinality, maximum-weight assignment made canonical
by greedy forcing: candidate pairs are tried in a deterministic,
role-symmetric order and kept only when they preserve the optimum.  That
makes the matched/missing/extra sets a pure function of the two graphs and
the options, and symmetric under swapping the arguments.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from difflib import SequenceMatcher

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import SummaryGraph, Transition, expand_groups

NODE_SIMILARITY_THRESHOLD = 0.9
EDGE_JACCARD_THRESHOLD = 0.5

# built-in event-token aliases; extendable per protocol via options
EVENT_TOKEN_ALIASES = {
    "rcv": "receive",
    "snd": "send",
    "seg": "segment",
}
STOP_TOKENS = {"a", "an", "the"}

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# weight tiers: cardinality dominates, then exact > alias > fuzzy similarity
_SCALE = 1_000_000
_EXACT_W = 3 * _SCALE
_ALIAS_W = 2 * _SCALE


@dataclass(frozen=True)
class DiffOptions:
    node_aliases: tuple[tuple[str, str], ...] = ()  # (variant, canonical) pairs
    event_aliases: tuple[tuple[str, str], ...] = ()
    node_threshold: float = NODE_SIMILARITY_THRESHOLD
    edge_threshold: float = EDGE_JACCARD_THRESHOLD

    @staticmethod
    def from_alias_file(path: str) -> "DiffOptions":
        data = json.loads(open(path, encoding="utf-8").read())
        return DiffOptions(
            node_aliases=tuple(sorted((str(k), str(v)) for k, v in data.get("nodes", {}).items())),
            event_aliases=tuple(sorted((str(k), str(v)) for k, v in data.get("events", {}).items())),
        )


@dataclass
class DiffReport:
    missing_nodes: list[str]
    extra_nodes: list[str]
    matched_nodes: list[dict]
    missing_edges: list[dict]
    extra_edges: list[dict]
    matched_edges: list[dict]
    counts: dict
    parameters: dict

    def to_json_obj(self) -> dict:
        return {
            "missing_nodes": self.missing_nodes,
            "extra_nodes": self.extra_nodes,
            "matched_nodes": self.matched_nodes,
            "missing_edges": self.missing_edges,
            "extra_edges": self.extra_edges,
            "matched_edges": self.matched_edges,
            "counts": self.counts,
            "parameters": self.parameters,
        }

    @staticmethod
    def from_json_obj(data: dict) -> "DiffReport":
        return DiffReport(
            missing_nodes=list(data["missing_nodes"]),
            extra_nodes=list(data["extra_nodes"]),
            matched_nodes=list(data["matched_nodes"]),
            missing_edges=list(data["missing_edges"]),
            extra_edges=list(data["extra_edges"]),
            matched_edges=list(data["matched_edges"]),
            counts=dict(data["counts"]),
            parameters=dict(data["parameters"]),
        )


def name_similarity(a: str, b: str) -> float:
    # evaluate on the sorted pair: SequenceMatcher does not promise a
    # symmetric ratio, and role symmetry of the diff depends on it
    lo, hi = sorted((a, b))
    return SequenceMatcher(None, lo, hi).ratio()


def event_tokens(event: str, aliases: dict[str, str] | None = None) -> frozenset[str]:
    merged = dict(EVENT_TOKEN_ALIASES)
    if aliases:
        merged.update(aliases)
    tokens = set()
    for token in _TOKEN_RE.findall(event.lower()):
        if token in STOP_TOKENS:
            continue
        tokens.add(merged.get(token, token))
    return frozenset(tokens)


def event_similarity(a: str, b: str, aliases: dict[str, str] | None = None) -> float:
    ta, tb = event_tokens(a, aliases), event_tokens(b, aliases)
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


# -- canonical assignment -----------------------------------------------------


def _solve(n_a: int, n_b: int, weights: dict[tuple[int, int], int]) -> tuple[int, int]:
    """(cardinality, total weight) of the best assignment."""
    if not weights:
        return (0, 0)
    big = sum(weights.values()) + 1
    size = max(n_a, n_b)
    m = np.zeros((size, size), dtype=np.int64)
    for (i, j), w in weights.items():
        m[i, j] = big + w
    rows, cols = linear_sum_assignment(m, maximize=True)
    card = 0
    total = 0
    for i, j in zip(rows, cols):
        if m[i, j] > 0:
            card += 1
            total += int(m[i, j] - big)
    return (card, total)


def canonical_matching(
    keys_a: list[str],
    keys_b: list[str],
    weights: dict[tuple[int, int], int],
) -> list[tuple[int, int]]:
    """Deterministic optimal matching.

    Pairs are considered by descending weight, then by the unordered pair of
    keys, and forced one at a time whenever doing so keeps the assignment
    optimum reachable; the candidate order does not depend on which side is
    "reference", so swapping the sides mirrors the result exactly.
    """
    best = _solve(len(keys_a), len(keys_b), weights)
    if best[0] == 0:
        return []

    def pair_order(item: tuple[tuple[int, int], int]):
        (i, j), w = item
        ka, kb = keys_a[i], keys_b[j]
        return (-w, min(ka, kb), max(ka, kb))

    candidates = sorted(weights.items(), key=pair_order)
    chosen: list[tuple[int, int]] = []
    used_a: set[int] = set()
    used_b: set[int] = set()
    forced_weight = 0
    for (i, j), w in candidates:
        if i in used_a or j in used_b:
            continue
        trial_a = used_a | {i}
        trial_b = used_b | {j}
        residual = {
            (x, y): wt
            for (x, y), wt in weights.items()
            if x not in trial_a and y not in trial_b
        }
        card, weight = _solve(len(keys_a), len(keys_b), residual)
        if card + len(chosen) + 1 == best[0] and weight + forced_weight + w == best[1]:
            chosen.append((i, j))
            used_a, used_b = trial_a, trial_b
            forced_weight += w
    return chosen


# -- diff ----------------------------------------------------------------------


def _edge_dict(t: Transition) -> dict:
    return {"source": t.source, "target": t.target, "event": t.event, "origin": t.origin}


def _expanded_with_origins(graph: SummaryGraph) -> tuple[SummaryGraph, dict[tuple[str, str, str], tuple[str, str, str]]]:
    """Expand grouped states, remembering which original edge each expanded
    edge came from (for the collapsed counts in the report)."""
    grouped = {s.name: s for s in graph.states if s.kind == "grouped"}
    origin_of: dict[tuple[str, str, str], tuple[str, str, str]] = {}
    expanded = expand_groups(graph)
    if not grouped:
        for t in graph.transitions:
            origin_of[(t.source, t.target, t.event)] = (t.source, t.target, t.event)
        return expanded, origin_of
    for t in graph.transitions:
        sources = [t.source]
        if t.source in grouped:
            sources = list(t.grouped_members or grouped[t.source].members)
        targets = [t.target]
        if t.target in grouped:
            targets = list(grouped[t.target].members)
        for src in sources:
            for tgt in targets:
                origin_of.setdefault((src, tgt, t.event), (t.source, t.target, t.event))
    return expanded, origin_of


def diff(
    extracted: SummaryGraph,
    reference: SummaryGraph,
    options: DiffOptions = DiffOptions(),
) -> DiffReport:
    node_alias = dict(options.node_aliases)
    event_alias = dict(options.event_aliases)

    expanded, origin_of = _expanded_with_origins(extracted)
    any_states = {s.name for s in expanded.states if s.kind == "any"}

    ext_nodes = sorted(s.name for s in expanded.states if s.kind != "any")
    ref_nodes = sorted(s.name for s in reference.states if s.kind != "any")

    def canon(name: str) -> str:
        return node_alias.get(name, name)

    node_weights: dict[tuple[int, int], int] = {}
    node_sim: dict[tuple[int, int], float] = {}
    for i, rn in enumerate(ref_nodes):
        for j, en in enumerate(ext_nodes):
            if rn == en:
                node_weights[(i, j)] = _EXACT_W
                node_sim[(i, j)] = 1.0
            elif canon(rn) == canon(en):
                node_weights[(i, j)] = _ALIAS_W
                node_sim[(i, j)] = 1.0
            else:
                sim = name_similarity(rn, en)
                if sim >= options.node_threshold:
                    node_weights[(i, j)] = int(round(sim * _SCALE))
                    node_sim[(i, j)] = sim

    node_pairs = canonical_matching(ref_nodes, ext_nodes, node_weights)
    ref_to_ext = {ref_nodes[i]: ext_nodes[j] for i, j in node_pairs}
    ext_to_ref = {ext_nodes[j]: ref_nodes[i] for i, j in node_pairs}

    matched_nodes = [
        {
            "reference": ref_nodes[i],
            "extracted": ext_nodes[j],
            "score": round(node_sim[(i, j)], 6),
        }
        for i, j in sorted(node_pairs)
    ]
    missing_nodes = sorted(set(ref_nodes) - set(ref_to_ext))
    extra_nodes = sorted(set(ext_nodes) - set(ext_to_ref))

    ref_edges = sorted(
        reference.transitions, key=lambda t: (t.source, t.target, t.event)
    )
    ext_all = sorted(
        expanded.transitions, key=lambda t: (t.source, t.target, t.event)
    )
    ext_edges = [t for t in ext_all if t.source not in any_states]
    any_edges = [t for t in ext_all if t.source in any_states]

    def edge_key(t: Transition) -> str:
        return f"{t.source}\x1f{t.target}\x1f{t.event}"

    edge_weights: dict[tuple[int, int], int] = {}
    edge_sim: dict[tuple[int, int], float] = {}
    for i, rt in enumerate(ref_edges):
        for j, et in enumerate(ext_edges):
            if ref_to_ext.get(rt.source) != et.source:
                continue
            if ref_to_ext.get(rt.target) != et.target:
                continue
            sim = event_similarity(rt.event, et.event, event_alias)
            if sim >= options.edge_threshold:
                edge_weights[(i, j)] = int(round(sim * _SCALE))
                edge_sim[(i, j)] = sim

    edge_pairs = canonical_matching(
        [edge_key(t) for t in ref_edges],
        [edge_key(t) for t in ext_edges],
        edge_weights,
    )
    matched_ref_idx = {i for i, _ in edge_pairs}
    matched_ext_idx = {j for _, j in edge_pairs}
    matched_edges = [
        {
            "reference": _edge_dict(ref_edges[i]),
            "extracted": _edge_dict(ext_edges[j]),
            "score": round(edge_sim[(i, j)], 6),
            "via_any": False,
        }
        for i, j in sorted(edge_pairs)
    ]

    # wildcard-source edges match any still-unmatched reference edge whose
    # source is covered by the extracted graph
    covered_ref_sources = set(ref_to_ext)
    used_any: set[int] = set()
    for a_idx, at in enumerate(any_edges):
        for i, rt in enumerate(ref_edges):
            if i in matched_ref_idx:
                continue
            if rt.source not in covered_ref_sources:
                continue
            if ref_to_ext.get(rt.target) != at.target:
                continue
            sim = event_similarity(rt.event, at.event, event_alias)
            if sim >= options.edge_threshold:
                matched_ref_idx.add(i)
                used_any.add(a_idx)
                matched_edges.append(
                    {
                        "reference": _edge_dict(rt),
                        "extracted": _edge_dict(at),
                        "score": round(sim, 6),
                        "via_any": True,
                    }
                )

    missing_edges = [
        _edge_dict(ref_edges[i])
        for i in range(len(ref_edges))
        if i not in matched_ref_idx
    ]
    extra_edges = [
        _edge_dict(ext_edges[j])
        for j in range(len(ext_edges))
        if j not in matched_ext_idx
    ] + [_edge_dict(any_edges[a]) for a in range(len(any_edges)) if a not in used_any]

    extra_collapsed = {
        origin_of.get((e["source"], e["target"], e["event"]), (e["source"], e["target"], e["event"]))
        for e in extra_edges
    }

    counts = {
        "missing_nodes": len(missing_nodes),
        "missing_edges": len(missing_edges),
        "extra_nodes": len(extra_nodes),
        "extra_edges": len(extra_edges),
        "extra_edges_collapsed": len(extra_collapsed),
        "matched_nodes": len(matched_nodes),
        "matched_edges": len(matched_edges),
    }
    parameters = {
        "node_threshold": options.node_threshold,
        "edge_threshold": options.edge_threshold,
        "node_aliases": dict(options.node_aliases),
        "event_aliases": dict(options.event_aliases),
        "builtin_event_aliases": dict(EVENT_TOKEN_ALIASES),
        "grouped_expansion": "per-member",
        "any_states": sorted(any_states),
    }
    return DiffReport(
        missing_nodes=missing_nodes,
        extra_nodes=extra_nodes,
        matched_nodes=matched_nodes,
        missing_edges=missing_edges,
        extra_edges=extra_edges,
        matched_edges=matched_edges,
        counts=counts,
        parameters=parameters,
    )


# -- rendering -----------------------------------------------------------------


def _fmt_edge(e: dict) -> str:
    return f"{e['source']} -> {e['target']} on {e['event']!r}"


def render_report(report: DiffReport, fmt: str = "text", label: str = "") -> str:
    if fmt == "json":
        return json.dumps(report.to_json_obj(), sort_keys=True, indent=2) + "\n"
    if fmt == "markdown-table":
        name = label or report.parameters.get("label", "") or "graph"
        lines = [
            "| RFC | Missing Nodes | Missing Edges |",
            "| --- | --- | --- |",
            f"| {name} | {report.counts['missing_nodes']} | {report.counts['missing_edges']} |",
        ]
        return "\n".join(lines) + "\n"
    if fmt == "text":
        lines = [
            f"missing nodes ({len(report.missing_nodes)}): "
            + (", ".join(report.missing_nodes) or "none"),
            f"extra nodes ({len(report.extra_nodes)}): "
            + (", ".join(report.extra_nodes) or "none"),
            f"missing edges ({len(report.missing_edges)}):",
        ]
        lines.extend(f"  {_fmt_edge(e)}" for e in report.missing_edges)
        lines.append(f"extra edges ({len(report.extra_edges)}):")
        lines.extend(f"  {_fmt_edge(e)}" for e in report.extra_edges)
        lines.append(
            f"matched: {report.counts['matched_nodes']} nodes, "
            f"{report.counts['matched_edges']} edges"
        )
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
