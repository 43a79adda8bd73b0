"""Brute-force reference implementations the tests compare against.

Everything here is deliberately naive: exhaustive enumeration and plain
arithmetic, no shared code with the package's solvers beyond published
scoring definitions.
"""

from __future__ import annotations

import math
import re
from difflib import SequenceMatcher

# -- paragraph packing ---------------------------------------------------------

_BLANK_LINE_RE = re.compile(r"\n[ \t]*\n+")


def paragraph_spans(text: str) -> list[tuple[int, int]]:
    """Maximal blank-line-separated runs, with edge whitespace trimmed."""
    spans = []
    pos = 0
    for m in _BLANK_LINE_RE.finditer(text):
        if pos < m.start():
            spans.append((pos, m.start()))
        pos = m.end()
    if pos < len(text):
        spans.append((pos, len(text)))
    trimmed = []
    for start, end in spans:
        chunk = text[start:end]
        lead = len(chunk) - len(chunk.lstrip())
        trail = len(chunk) - len(chunk.rstrip())
        if start + lead < end - trail:
            trimmed.append((start + lead, end - trail))
    return trimmed


def min_fragments_by_paragraph(text: str, limit: int) -> int:
    """Fewest contiguous paragraph groups whose joined document slice stays
    at most limit estimated tokens; a single over-limit paragraph counts as
    one group (the oracle does not model sentence-level splits)."""
    spans = paragraph_spans(text)
    n = len(spans)
    best: list[float] = [0] + [math.inf] * n
    for end in range(1, n + 1):
        for start in range(end, 0, -1):
            piece = text[spans[start - 1][0] : spans[end - 1][1]]
            size = (len(piece) + 3) // 4
            if size > limit and start != end:
                break  # widening the window only grows it
            best[end] = min(best[end], best[start - 1] + 1)
    return int(best[n])


# -- retrieval -----------------------------------------------------------------


def cosine(a: list[float], b: list[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def exhaustive_top_k(entries, query_values, k, exclude=frozenset()):
    """entries: ordered (fragment_id, values) pairs.  Full scan, sort by
    (-score, index), take k."""
    scored = []
    for position, (fragment_id, values) in enumerate(entries):
        if fragment_id in exclude:
            continue
        scored.append((cosine(query_values, values), position, fragment_id))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [(fid, score) for score, _, fid in scored[:k]]


# -- assignment ----------------------------------------------------------------


def brute_force_best(n_a: int, n_b: int, weights: dict[tuple[int, int], int]):
    """(max cardinality, max total weight at that cardinality) over every
    injective partial assignment, by full enumeration."""
    by_a: dict[int, list[tuple[int, int]]] = {}
    for (i, j), w in weights.items():
        by_a.setdefault(i, []).append((j, w))

    a_indices = sorted(by_a)
    best = (0, 0)

    def walk(pos: int, used_b: frozenset[int], card: int, total: int):
        nonlocal best
        if (card, total) > best:
            best = (card, total)
        if pos == len(a_indices):
            return
        i = a_indices[pos]
        walk(pos + 1, used_b, card, total)  # leave i unmatched
        for j, w in by_a[i]:
            if j not in used_b:
                walk(pos + 1, used_b | {j}, card + 1, total + w)

    walk(0, frozenset(), 0, 0)
    return best


def brute_force_canonical(
    keys_a: list[str], keys_b: list[str], weights: dict[tuple[int, int], int]
) -> list[tuple[int, int]]:
    """Deterministic optimum via exhaustive search: force candidate pairs in
    (descending weight, unordered key pair) order whenever the brute-force
    optimum stays reachable."""
    best = brute_force_best(len(keys_a), len(keys_b), weights)
    if best[0] == 0:
        return []

    def order(item):
        (i, j), w = item
        ka, kb = keys_a[i], keys_b[j]
        return (-w, min(ka, kb), max(ka, kb))

    chosen: list[tuple[int, int]] = []
    used_a: set[int] = set()
    used_b: set[int] = set()
    forced = 0
    for (i, j), w in sorted(weights.items(), key=order):
        if i in used_a or j in used_b:
            continue
        residual = {
            (x, y): wt
            for (x, y), wt in weights.items()
            if x not in used_a | {i} and y not in used_b | {j}
        }
        card, total = brute_force_best(len(keys_a), len(keys_b), residual)
        if card + len(chosen) + 1 == best[0] and total + forced + w == best[1]:
            chosen.append((i, j))
            used_a.add(i)
            used_b.add(j)
            forced += w
    return chosen


# -- graph diff ----------------------------------------------------------------

_SCALE = 1_000_000
_EXACT_W = 3 * _SCALE
_ALIAS_W = 2 * _SCALE
_EVENT_ALIASES = {"rcv": "receive", "snd": "send", "seg": "segment"}
_STOP = {"a", "an", "the"}


def _tokens(event: str) -> frozenset[str]:
    import re

    out = set()
    for tok in re.findall(r"[a-z0-9]+", event.lower()):
        if tok in _STOP:
            continue
        out.add(_EVENT_ALIASES.get(tok, tok))
    return frozenset(out)


def _event_sim(a: str, b: str) -> float:
    ta, tb = _tokens(a), _tokens(b)
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)


def oracle_diff(extracted, reference, node_threshold=0.9, edge_threshold=0.5):
    """Missing/extra node and edge sets for two plain (normal-states-only)
    graphs, with every assignment found by exhaustive enumeration.

    Scoring follows the published matching rules: exact name equality
    outranks fuzzy similarity, cardinality dominates weight, ties break on
    the unordered key pair.  Returns a dict of sets keyed like DiffReport.
    """
    ref_nodes = sorted(s.name for s in reference.states)
    ext_nodes = sorted(s.name for s in extracted.states)

    node_weights: dict[tuple[int, int], int] = {}
    for i, rn in enumerate(ref_nodes):
        for j, en in enumerate(ext_nodes):
            if rn == en:
                node_weights[(i, j)] = _EXACT_W
            else:
                sim = SequenceMatcher(None, *sorted((rn, en))).ratio()
                if sim >= node_threshold:
                    node_weights[(i, j)] = int(round(sim * _SCALE))

    node_pairs = brute_force_canonical(ref_nodes, ext_nodes, node_weights)
    ref_to_ext = {ref_nodes[i]: ext_nodes[j] for i, j in node_pairs}
    ext_matched = {ext_nodes[j] for _, j in node_pairs}

    ref_edges = sorted(
        reference.transitions, key=lambda t: (t.source, t.target, t.event)
    )
    ext_edges = sorted(
        extracted.transitions, key=lambda t: (t.source, t.target, t.event)
    )
    edge_weights: dict[tuple[int, int], int] = {}
    for i, rt in enumerate(ref_edges):
        for j, et in enumerate(ext_edges):
            if ref_to_ext.get(rt.source) != et.source:
                continue
            if ref_to_ext.get(rt.target) != et.target:
                continue
            sim = _event_sim(rt.event, et.event)
            if sim >= edge_threshold:
                edge_weights[(i, j)] = int(round(sim * _SCALE))

    def ekey(t):
        return f"{t.source}\x1f{t.target}\x1f{t.event}"

    edge_pairs = brute_force_canonical(
        [ekey(t) for t in ref_edges], [ekey(t) for t in ext_edges], edge_weights
    )
    matched_ref = {i for i, _ in edge_pairs}
    matched_ext = {j for _, j in edge_pairs}

    def triple(t):
        return (t.source, t.target, t.event)

    return {
        "missing_nodes": set(ref_nodes) - set(ref_to_ext),
        "extra_nodes": set(ext_nodes) - ext_matched,
        "missing_edges": {
            triple(t) for i, t in enumerate(ref_edges) if i not in matched_ref
        },
        "extra_edges": {
            triple(t) for j, t in enumerate(ext_edges) if j not in matched_ext
        },
    }
