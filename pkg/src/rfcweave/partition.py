"""Fragmenting a document into LLM-sized units along section boundaries."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass

from .errors import InvalidConfig
from .ingest import RfcDocument, SectionNode

MIN_FRAGMENT_SIZE = 256
DEFAULT_MAX_FRAGMENT_SIZE = 3000

# Characters that make up box-and-arrow art.  'V' and the diagonals are
# included because real figures use them; prose rarely clears the density
# threshold anyway.
DIAGRAM_CHARS = set("+-|<>^vV\\/")
DIAGRAM_DENSITY = 0.25
DIAGRAM_MIN_LINES = 3
DIAGRAM_GAP_LINES = 2

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass(frozen=True)
class Fragment:
    fragment_id: str
    section_path: tuple[str, ...]
    span: tuple[int, int]
    text: str
    size_estimate: int
    contains_diagram: bool


def estimate_size(text: str) -> int:
    """Token-count stand-in: ceil(len/4)."""
    return (len(text) + 3) // 4


def detect_diagram(
    text: str,
    density: float = DIAGRAM_DENSITY,
    min_lines: int = DIAGRAM_MIN_LINES,
    gap_lines: int = DIAGRAM_GAP_LINES,
    chars: frozenset[str] | set[str] = frozenset(DIAGRAM_CHARS),
) -> tuple[bool, tuple[tuple[int, int], ...]]:
    """Find ASCII-art line ranges.

    A line qualifies when >density of its non-space characters are box
    characters (and there are at least two of them).  Runs of >=min_lines
    qualifying lines form a span; up to gap_lines interior lines that still
    carry a box character (figure labels, arrow stems) are bridged so one
    figure yields one span.  Returned spans are character ranges into text.
    """
    lines = text.split("\n")
    offsets = []
    pos = 0
    for line in lines:
        offsets.append(pos)
        pos += len(line) + 1

    def box_count(line: str) -> int:
        return sum(1 for ch in line if ch in chars)

    def qualifies(line: str) -> bool:
        non_space = sum(1 for ch in line if ch != " " and ch != "\t")
        if non_space == 0:
            return False
        boxes = box_count(line)
        return boxes >= 2 and boxes / non_space > density

    spans: list[tuple[int, int]] = []
    i = 0
    n = len(lines)
    while i < n:
        if not qualifies(lines[i]):
            i += 1
            continue
        start = i
        end = i  # last qualifying line
        count = 1
        j = i + 1
        gap = 0
        while j < n:
            if qualifies(lines[j]):
                end = j
                count += 1
                gap = 0
                j += 1
            elif box_count(lines[j]) >= 1 and gap < gap_lines:
                gap += 1
                j += 1
            else:
                break
        if count >= min_lines:
            spans.append((offsets[start], offsets[end] + len(lines[end])))
        i = end + 1
    return bool(spans), tuple(spans)


def _leaf_ranges(document: RfcDocument) -> list[tuple[int, int, tuple[str, ...]]]:
    """Atomic text ranges between consecutive heading boundaries, each tagged
    with the section-number path of the deepest section containing it."""
    text = document.normalized_text
    if not text:
        return []
    all_nodes: list[SectionNode] = []
    for top in document.section_tree:
        all_nodes.extend(top.walk())
    boundaries = sorted({0, len(text), *(n.span[0] for n in all_nodes)})
    ranges = []
    for a, b in zip(boundaries, boundaries[1:]):
        if text[a:b].strip() == "":
            continue
        deepest: SectionNode | None = None
        depth = -1
        for node in all_nodes:
            if node.span[0] <= a and b <= node.span[1]:
                d = node.number.count(".") + 1 if node.number else 0
                if d > depth:
                    depth = d
                    deepest = node
        path: tuple[str, ...] = ()
        if deepest is not None and deepest.number:
            parts = deepest.number.split(".")
            path = tuple(".".join(parts[: k + 1]) for k in range(len(parts)))
        ranges.append((a, b, path))
    return ranges


def _paragraph_spans(text: str, base: int) -> list[tuple[int, int]]:
    """Maximal runs of non-blank lines, as global character spans."""
    spans = []
    start = None
    pos = 0
    for line in text.split("\n"):
        blank = line.strip() == ""
        if blank:
            if start is not None:
                spans.append((base + start, base + pos - 1))
                start = None
        else:
            if start is None:
                start = pos
        pos += len(line) + 1
    if start is not None:
        spans.append((base + start, base + min(pos - 1, len(text))))
    return spans


def _merge_over_diagrams(
    paragraphs: list[tuple[int, int]], diagrams: list[tuple[int, int]]
) -> list[tuple[tuple[int, int], bool]]:
    """Merge paragraphs that a diagram span touches into single atoms."""
    atoms: list[tuple[tuple[int, int], bool]] = []
    for span in paragraphs:
        hit = any(span[0] < d[1] and d[0] < span[1] for d in diagrams)
        if atoms and hit and atoms[-1][1]:
            prev_span, _ = atoms[-1]
            # same diagram spilling over consecutive paragraphs
            shared = any(
                prev_span[0] < d[1] and d[0] < span[1] for d in diagrams
            )
            if shared:
                atoms[-1] = ((prev_span[0], span[1]), True)
                continue
        atoms.append((span, hit))
    return atoms


def _trim(text: str, span: tuple[int, int]) -> tuple[int, int]:
    start, end = span
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return (start, end)


def _split_sentences(text: str, span: tuple[int, int], limit: int) -> list[tuple[int, int]]:
    """Split an oversized paragraph at sentence ends, greedy-packed."""
    body = text[span[0] : span[1]]
    cuts = [span[0]]
    for m in _SENTENCE_SPLIT_RE.finditer(body):
        cuts.append(span[0] + m.end())
    cuts.append(span[1])
    pieces: list[tuple[int, int]] = []
    i = 0
    while i < len(cuts) - 1:
        j = i + 1
        while j + 1 < len(cuts) and estimate_size(text[cuts[i] : cuts[j + 1]]) <= limit:
            j += 1
        piece = (cuts[i], cuts[j])
        if estimate_size(text[piece[0] : piece[1]]) > limit:
            # single sentence over the limit: hard character cut
            step = limit * 4
            s = piece[0]
            while s < piece[1]:
                pieces.append((s, min(s + step, piece[1])))
                s += step
        else:
            pieces.append(piece)
        i = j
    return pieces


def partition(
    document: RfcDocument, max_fragment_size: int = DEFAULT_MAX_FRAGMENT_SIZE
) -> tuple[Fragment, ...]:
    if max_fragment_size < MIN_FRAGMENT_SIZE:
        raise InvalidConfig(
            f"max_fragment_size must be >= {MIN_FRAGMENT_SIZE}, got {max_fragment_size}"
        )
    text = document.normalized_text
    _, global_diagrams = detect_diagram(text)
    diagrams = list(global_diagrams)

    fragments: list[Fragment] = []

    def emit(span: tuple[int, int]) -> None:
        span = _trim(text, span)
        if span[0] >= span[1]:
            return
        body = text[span[0] : span[1]]
        fragment_id = "fr-" + hashlib.sha256(
            f"{document.rfc_id}:{span[0]}:{span[1]}".encode("utf-8")
        ).hexdigest()[:10]
        fragments.append(
            Fragment(
                fragment_id=fragment_id,
                section_path=next(
                    (p for a, b, p in ranges if a <= span[0] and span[1] <= b), ()
                ),
                span=span,
                text=body,
                size_estimate=estimate_size(body),
                contains_diagram=any(
                    span[0] < d[1] and d[0] < span[1] for d in diagrams
                ),
            )
        )

    ranges = _leaf_ranges(document)
    for a, b, _path in ranges:
        if estimate_size(text[a:b].strip()) <= max_fragment_size:
            emit((a, b))
            continue
        paragraphs = _paragraph_spans(text[a:b], a)
        atoms = _merge_over_diagrams(paragraphs, diagrams)
        pack_start: int | None = None
        pack_end = 0
        for (s, e), is_diagram in atoms:
            too_big = estimate_size(text[s:e]) > max_fragment_size
            if too_big:
                if pack_start is not None:
                    emit((pack_start, pack_end))
                    pack_start = None
                if is_diagram:
                    # a figure is never split, even oversized
                    emit((s, e))
                else:
                    for piece in _split_sentences(text, (s, e), max_fragment_size):
                        emit(piece)
                continue
            if pack_start is None:
                pack_start, pack_end = s, e
            elif estimate_size(text[pack_start:e]) <= max_fragment_size:
                pack_end = e
            else:
                emit((pack_start, pack_end))
                pack_start, pack_end = s, e
        if pack_start is not None:
            emit((pack_start, pack_end))

    fragments.sort(key=lambda f: f.span)
    return tuple(fragments)


def fragments_to_jsonl(fragments: tuple[Fragment, ...] | list[Fragment]) -> str:
    lines = []
    for f in fragments:
        lines.append(
            json.dumps(
                {
                    "fragment_id": f.fragment_id,
                    "section_path": list(f.section_path),
                    "span": list(f.span),
                    "size_estimate": f.size_estimate,
                    "contains_diagram": f.contains_diagram,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
