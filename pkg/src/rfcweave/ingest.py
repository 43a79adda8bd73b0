"""RFC loading and normalization.

Produces the document model the rest of the pipeline anchors into: normalized
text, a normalized-index -> raw-index offset map, and a section tree.  The
normalizer only ever deletes characters (never inserts or rewrites), which is
what keeps the offset map single-valued and exact quoting possible.
"""

from __future__ import annotations

import datetime as _dt
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .config import default_cache_dir
from .errors import FetchFailed, NotFound, NotText

RFC_URL_TEMPLATE = "https://www.rfc-editor.org/rfc/rfc{number}.txt"

_FOOTER_RE = re.compile(r"\[Page\s+\d+\]\s*$")
_HEADER_RE = re.compile(
    r"^RFC\s+\d+\s+\S.*"
    r"(January|February|March|April|May|June|July|August|September|October|"
    r"November|December)\s+\d{4}\s*$"
)
_RFC_NUMBER_RE = re.compile(r"^(?:rfc)?\s*(\d{1,5})$", re.IGNORECASE)
_HEADING_RE = re.compile(r"^(\d+(?:\.\d+)*)\.?\s+(\S.*)$")
_SNIFF_ID_RE = re.compile(r"Request for Comments:\s*(\d+)")

# Table condensation only fires on this strict shape so state-machine
# figures (single-column boxes, arrows between rules) are never touched.
_RULE_RE = re.compile(r"^\s*\+(?:-+\+)+$")
_MONTHS = (
    "January February March April May June July August September "
    "October November December"
).split()


@dataclass(frozen=True)
class SectionNode:
    """One heading-delimited section over normalized text."""

    number: str
    title: str
    span: tuple[int, int]
    children: tuple["SectionNode", ...] = ()

    def walk(self) -> Iterable["SectionNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class RfcDocument:
    rfc_id: str
    raw_text: str
    normalized_text: str
    offset_map: tuple[int, ...]
    section_tree: tuple[SectionNode, ...]
    source_kind: str  # local_file | rfc_editor_fetch
    origin: str  # path or URL
    fetched_at: str | None = None

    def find_section(self, number: str) -> SectionNode | None:
        for top in self.section_tree:
            for node in top.walk():
                if node.number == number:
                    return node
        return None

    def to_raw_span(self, span: tuple[int, int]) -> tuple[int, int]:
        """Map a normalized half-open span back to raw text offsets."""
        start, end = span
        if start == end:
            raw = self.offset_map[start] if start < len(self.offset_map) else len(self.raw_text)
            return (raw, raw)
        return (self.offset_map[start], self.offset_map[end - 1] + 1)


# -- normalization passes ----------------------------------------------------
#
# Each pass maps text -> (text, map) where map[i] is the input index that
# produced output character i.  Passes compose; the final map points into
# the original raw text.


def _line_spans(text: str) -> list[tuple[int, int]]:
    """Half-open spans of each line, newline included."""
    spans = []
    start = 0
    n = len(text)
    while start < n:
        nl = text.find("\n", start)
        if nl == -1:
            spans.append((start, n))
            break
        spans.append((start, nl + 1))
        start = nl + 1
    return spans


def _keep_chars(text: str, dropped: set[int]) -> tuple[str, list[int]]:
    out = []
    mapping = []
    for i, ch in enumerate(text):
        if i not in dropped:
            out.append(ch)
            mapping.append(i)
    return "".join(out), mapping


def _drop_cr(text: str) -> tuple[str, list[int]]:
    if "\r" not in text:
        return text, list(range(len(text)))
    return _keep_chars(text, {i for i, ch in enumerate(text) if ch == "\r"})


def _drop_form_feeds(text: str) -> tuple[str, list[int]]:
    if "\f" not in text:
        return text, list(range(len(text)))
    return _keep_chars(text, {i for i, ch in enumerate(text) if ch == "\f"})


_BLANK, _FOOTER, _FF, _HEADER, _TEXT = range(5)


def _classify_line(body: str) -> int:
    stripped = body.strip()
    if stripped == "":
        return _BLANK
    if stripped.strip("\f ") == "" and "\f" in stripped:
        return _FF
    if _FOOTER_RE.search(body):
        return _FOOTER
    if _HEADER_RE.match(body.rstrip()):
        return _HEADER
    return _TEXT


def _strip_page_blocks(text: str) -> tuple[str, list[int]]:
    """Remove footer / form-feed / header blocks between pages.

    The whole block, including blank padding on both sides when a header
    closes it, is deleted so a paragraph split across the page boundary
    becomes contiguous again.
    """
    spans = _line_spans(text)
    kinds = [_classify_line(text[s:e].rstrip("\n")) for s, e in spans]
    n = len(spans)
    drop_lines: set[int] = set()
    i = 0
    while i < n:
        if kinds[i] not in (_FOOTER, _FF) or i in drop_lines:
            i += 1
            continue
        block = []
        j = i - 1
        while j >= 0 and kinds[j] == _BLANK and j not in drop_lines:
            block.append(j)
            j -= 1
        k = i
        if kinds[k] == _FOOTER:
            block.append(k)
            k += 1
            while k < n and kinds[k] == _BLANK:
                block.append(k)
                k += 1
        if k < n and kinds[k] == _FF:
            block.append(k)
            k += 1
        probe = k
        gap = []
        while probe < n and kinds[probe] == _BLANK:
            gap.append(probe)
            probe += 1
        if probe < n and kinds[probe] == _HEADER:
            block.extend(gap)
            block.append(probe)
            probe += 1
            while probe < n and kinds[probe] == _BLANK:
                block.append(probe)
                probe += 1
            k = probe
        drop_lines.update(block)
        i = max(k, i + 1)
    if not drop_lines:
        return text, list(range(len(text)))
    dropped: set[int] = set()
    for li in drop_lines:
        s, e = spans[li]
        dropped.update(range(s, e))
    return _keep_chars(text, dropped)


def _strip_trailing_ws(text: str) -> tuple[str, list[int]]:
    dropped: set[int] = set()
    for s, e in _line_spans(text):
        body_end = e - 1 if text[e - 1] == "\n" else e
        j = body_end
        while j > s and text[j - 1] in " \t":
            j -= 1
        if j < body_end:
            dropped.update(range(j, body_end))
    if not dropped:
        return text, list(range(len(text)))
    return _keep_chars(text, dropped)


def _collapse_blank_runs(text: str) -> tuple[str, list[int]]:
    """Runs of 2+ blank lines keep only the last blank's newline."""
    spans = _line_spans(text)
    dropped: set[int] = set()
    run: list[int] = []
    for idx, (s, e) in enumerate(spans):
        body = text[s:e].rstrip("\n")
        if body == "" and text[s:e].endswith("\n"):
            run.append(idx)
        else:
            if len(run) >= 2:
                for li in run[:-1]:
                    dropped.update(range(*spans[li]))
            run = []
    if len(run) >= 2:
        for li in run[:-1]:
            dropped.update(range(*spans[li]))
    if not dropped:
        return text, list(range(len(text)))
    return _keep_chars(text, dropped)


def _rule_positions(body: str) -> tuple[int, ...] | None:
    if not _RULE_RE.match(body):
        return None
    return tuple(i for i, ch in enumerate(body) if ch == "+")


def _is_cell_row(body: str, positions: tuple[int, ...]) -> bool:
    if "+" in body or "|" not in body:
        return False
    bars = tuple(i for i, ch in enumerate(body) if ch == "|")
    if len(bars) < 2:
        return False
    if bars[0] != positions[0] or bars[-1] != positions[-1]:
        return False
    return set(bars) <= set(positions)


def _condense_tables(text: str) -> tuple[str, list[int]]:
    """Squeeze bordered tables: duplicate adjacent rules dropped, dash runs
    and cell padding collapsed.  Cell text itself is untouched."""
    spans = _line_spans(text)
    bodies = [text[s:e].rstrip("\n") for s, e in spans]
    n = len(spans)
    dropped: set[int] = set()
    i = 0
    while i < n:
        positions = _rule_positions(bodies[i])
        if positions is None or len(positions) < 3:
            i += 1
            continue
        j = i + 1
        last_rule = i
        rule_count = 1
        while j < n:
            if _rule_positions(bodies[j]) == positions:
                last_rule = j
                rule_count += 1
                j += 1
            elif _is_cell_row(bodies[j], positions):
                j += 1
            else:
                break
        if rule_count < 2:
            i = j
            continue
        block_end = last_rule  # trailing cell rows after the last rule stay outside
        prev_was_rule = False
        for li in range(i, block_end + 1):
            s, _ = spans[li]
            body = bodies[li]
            if _rule_positions(body) == positions:
                if prev_was_rule:
                    dropped.update(range(*spans[li]))
                    continue
                prev_was_rule = True
                run = 0
                for ci, ch in enumerate(body):
                    if ch == "-":
                        run += 1
                        if run >= 2:
                            dropped.add(s + ci)
                    else:
                        run = 0
            else:
                prev_was_rule = False
                # collapse space runs that touch a cell border
                ci = 0
                while ci < len(body):
                    if body[ci] != " ":
                        ci += 1
                        continue
                    start = ci
                    while ci < len(body) and body[ci] == " ":
                        ci += 1
                    touches = (
                        start == 0
                        or body[start - 1] == "|"
                        or ci >= len(body)
                        or body[ci] == "|"
                    )
                    if touches and ci - start >= 2:
                        dropped.update(range(s + start + 1, s + ci))
        i = block_end + 1
    if not dropped:
        return text, list(range(len(text)))
    return _keep_chars(text, dropped)


_PASSES: tuple[Callable[[str], tuple[str, list[int]]], ...] = (
    _drop_cr,
    _strip_page_blocks,
    _drop_form_feeds,
    _strip_trailing_ws,
    _collapse_blank_runs,
    _condense_tables,
)


def normalize(raw_text: str) -> tuple[str, tuple[int, ...]]:
    """Normalize RFC text, returning the text and its offset map.

    offset_map[i] is the raw-text index of the character that became
    normalized character i; it is strictly increasing.
    """
    text = raw_text
    total: list[int] | None = None
    for p in _PASSES:
        text, mapping = p(text)
        total = mapping if total is None else [total[i] for i in mapping]
    return text, tuple(total if total is not None else ())


# -- section tree ------------------------------------------------------------


def build_section_tree(normalized_text: str) -> tuple[SectionNode, ...]:
    """Build the heading tree from numbered, flush-left heading lines."""
    if normalized_text == "":
        return ()
    headings: list[tuple[int, str, str]] = []  # (offset, number, title)
    offset = 0
    for line in normalized_text.split("\n"):
        m = _HEADING_RE.match(line)
        if m and not line[:1].isspace():
            number = m.group(1)
            title = m.group(2).strip()
            # Guard against numbered list items: a heading never ends with
            # sentence punctuation and its title starts with a letter.
            if title and title[0].isalpha():
                headings.append((offset, number, title))
        offset += len(line) + 1

    end = len(normalized_text)
    if not headings:
        return (SectionNode(number="", title="", span=(0, end)),)

    tops: list[SectionNode] = []
    if headings[0][0] > 0:
        tops.append(SectionNode(number="", title="", span=(0, headings[0][0])))

    # Build nested nodes with an explicit stack keyed by dotted-number depth.
    entries = [
        (off, num, title, num.count(".") + 1) for off, num, title in headings
    ]
    spans: list[tuple[int, int]] = []
    for idx, (off, _num, _title, depth) in enumerate(entries):
        close = end
        for off2, _n2, _t2, depth2 in entries[idx + 1 :]:
            if depth2 <= depth:
                close = off2
                break
        spans.append((off, close))

    # children gathered bottom-up via a stack of (depth, node-under-construction)
    built: list[SectionNode] = [None] * len(entries)  # type: ignore[list-item]
    children_of: dict[int, list[int]] = {i: [] for i in range(len(entries))}
    top_idx: list[int] = []
    stack: list[int] = []
    for idx, (_off, _num, _title, depth) in enumerate(entries):
        while stack and entries[stack[-1]][3] >= depth:
            stack.pop()
        if stack:
            children_of[stack[-1]].append(idx)
        else:
            top_idx.append(idx)
        stack.append(idx)

    def _build(idx: int) -> SectionNode:
        off, num, title, _depth = entries[idx]
        return SectionNode(
            number=num,
            title=title,
            span=spans[idx],
            children=tuple(_build(c) for c in children_of[idx]),
        )

    tops.extend(_build(i) for i in top_idx)
    return tuple(tops)


# -- loading -----------------------------------------------------------------


def _looks_binary(data: bytes) -> bool:
    if b"\x00" in data[:4096]:
        return True
    head = data[:512].lstrip().lower()
    return head.startswith(b"%pdf") or head.startswith(b"<!doctype") or head.startswith(b"<html")


def _decode(data: bytes, origin: str) -> str:
    if _looks_binary(data):
        raise NotText(f"{origin} is not plain text")
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise NotText(f"{origin} is not ASCII/UTF-8 text: {exc}") from exc


def _sniff_rfc_id(raw_text: str, fallback: str) -> str:
    m = _SNIFF_ID_RE.search(raw_text[:4096])
    if m:
        return f"RFC{m.group(1)}"
    return fallback


def _default_fetch(url: str) -> str:
    import httpx

    try:
        resp = httpx.get(url, follow_redirects=True, timeout=30.0)
    except Exception as exc:  # httpx transport errors
        raise FetchFailed(f"fetch of {url} failed: {exc}") from exc
    if resp.status_code == 404:
        raise NotFound(f"no such RFC at {url}")
    if resp.status_code != 200:
        raise FetchFailed(f"fetch of {url} returned HTTP {resp.status_code}")
    return resp.text


def _from_raw(
    rfc_id: str, raw_text: str, source_kind: str, origin: str, fetched_at: str | None
) -> RfcDocument:
    normalized, offset_map = normalize(raw_text)
    tree = build_section_tree(normalized)
    return RfcDocument(
        rfc_id=rfc_id,
        raw_text=raw_text,
        normalized_text=normalized,
        offset_map=offset_map,
        section_tree=tree,
        source_kind=source_kind,
        origin=origin,
        fetched_at=fetched_at,
    )


def load_rfc(
    source: str,
    cache_dir: str | Path | None = None,
    fetch: Callable[[str], str] | None = None,
) -> RfcDocument:
    """Load from a local path or by RFC number (fetched and cached)."""
    path = Path(source)
    if path.is_file():
        raw = _decode(path.read_bytes(), str(path))
        rfc_id = _sniff_rfc_id(raw, path.stem.upper().replace(" ", ""))
        return _from_raw(rfc_id, raw, "local_file", str(path), None)

    m = _RFC_NUMBER_RE.match(source.strip())
    if not m:
        raise NotFound(f"{source!r} is neither an existing file nor an RFC number")
    number = m.group(1)
    rfc_id = f"RFC{number}"
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cached = cache / f"rfc{number}.txt"
    meta_path = cache / f"rfc{number}.meta.json"
    if cached.is_file():
        raw = _decode(cached.read_bytes(), str(cached))
        url = RFC_URL_TEMPLATE.format(number=number)
        fetched_at = None
        if meta_path.is_file():
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                url = meta.get("url", url)
                fetched_at = meta.get("fetched_at")
            except json.JSONDecodeError:
                pass
        return _from_raw(rfc_id, raw, "rfc_editor_fetch", url, fetched_at)

    url = RFC_URL_TEMPLATE.format(number=number)
    text = (fetch or _default_fetch)(url)
    if _looks_binary(text.encode("utf-8", errors="replace")):
        raise NotText(f"{url} did not return plain text")
    fetched_at = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    cache.mkdir(parents=True, exist_ok=True)
    cached.write_text(text, encoding="utf-8")
    meta_path.write_text(
        json.dumps({"url": url, "fetched_at": fetched_at}, indent=2) + "\n",
        encoding="utf-8",
    )
    return _from_raw(rfc_id, text, "rfc_editor_fetch", url, fetched_at)
