"""Anchoring model-returned passages to exact spans of normalized RFC text.

Exact substring match first; otherwise a stride-1 window sweep around
occurrences of the passage's rarest word, scored by difflib ratio, accepted
at or above the similarity threshold.  The returned quote is always the
exact slice of the document at the span, which is what keeps provenance
auditable.
"""

from __future__ import annotations

import re
from difflib import SequenceMatcher

from .graph import GroundedSpan

DEFAULT_THRESHOLD = 0.85
_WORD_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9'-]*")
_PAD = 64  # sweep slack around the seeded alignment, in characters
_END_SLACK = 24  # how far the window end may stretch or shrink
_MAX_SEED_OCCURRENCES = 200


def _similarity(a: str, b: str) -> float:
    return SequenceMatcher(None, a, b).ratio()


def _seed_word(passage: str, text: str) -> str | None:
    """The rarest passage word that occurs in the text; ties to the longest."""
    words = {w for w in _WORD_RE.findall(passage) if len(w) >= 3}
    best: tuple[int, int, str] | None = None
    for word in words:
        count = text.count(word)
        if count == 0:
            continue
        key = (count, -len(word), word)
        if best is None or key < best:
            best = key
    return best[2] if best else None


def _occurrences(text: str, needle: str) -> list[int]:
    out = []
    start = 0
    while len(out) < _MAX_SEED_OCCURRENCES:
        idx = text.find(needle, start)
        if idx == -1:
            break
        out.append(idx)
        start = idx + 1
    return out


def anchor_passage(
    passage: str, text: str, threshold: float = DEFAULT_THRESHOLD
) -> GroundedSpan | None:
    """Locate passage in text; None when nothing clears the threshold."""
    passage = passage.strip()
    if not passage or not text:
        return None

    exact = text.find(passage)
    if exact != -1:
        span = (exact, exact + len(passage))
        return GroundedSpan(span=span, quote=passage, match_kind="exact", similarity=1.0)

    seed = _seed_word(passage, text)
    if seed is None:
        return None
    offset_in_passage = passage.find(seed)
    length = len(passage)

    best: tuple[float, int, int] | None = None  # (ratio, start, end)
    for occ in _occurrences(text, seed):
        anchor = occ - offset_in_passage
        lo = max(0, anchor - _PAD)
        hi = min(len(text) - 1, anchor + _PAD)
        for start in range(lo, hi + 1):
            end = min(len(text), start + length)
            ratio = _similarity(passage, text[start:end])
            if best is None or ratio > best[0] + 1e-12:
                best = (ratio, start, end)
            elif best is not None and abs(ratio - best[0]) <= 1e-12:
                if (start, end - start) < (best[1], best[2] - best[1]):
                    best = (ratio, start, end)

    if best is None or best[0] < threshold:
        return None

    # polish the window end: whitespace drift changes candidate length
    ratio, start, end = best
    for candidate_end in range(
        max(start + 1, end - _END_SLACK), min(len(text), end + _END_SLACK) + 1
    ):
        r = _similarity(passage, text[start:candidate_end])
        if r > ratio + 1e-12 or (abs(r - ratio) <= 1e-12 and candidate_end < end):
            ratio, end = r, candidate_end

    if ratio < threshold:
        return None
    quote = text[start:end]
    # trim whitespace edges without losing the similarity guarantee
    lstrip = len(quote) - len(quote.lstrip())
    rstrip = len(quote) - len(quote.rstrip())
    if lstrip or rstrip:
        nstart, nend = start + lstrip, end - rstrip
        trimmed = text[nstart:nend]
        r = _similarity(passage, trimmed)
        if r >= threshold and r >= ratio - 1e-9:
            start, end, quote, ratio = nstart, nend, trimmed, r
    # a fuzzy match is by construction not an exact one, so its similarity
    # must stay strictly below 1.0 even after rounding
    similarity = min(round(ratio, 6), 0.999999)
    return GroundedSpan(
        span=(start, end),
        quote=quote,
        match_kind="fuzzy",
        similarity=similarity,
    )


def anchor_passages(
    passages: list[str], text: str, threshold: float = DEFAULT_THRESHOLD
) -> tuple[tuple[GroundedSpan, ...], tuple[str, ...]]:
    """Anchor many passages; returns (spans, passages that failed)."""
    spans: list[GroundedSpan] = []
    misses: list[str] = []
    for passage in passages:
        anchored = anchor_passage(passage, text, threshold)
        if anchored is None:
            misses.append(passage)
        else:
            spans.append(anchored)
    return tuple(spans), tuple(misses)
