"""Anchoring quoted passages to exact spans of the normalized text."""

from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from rfcweave.grounding import anchor_passage, anchor_passages

DOC = (
    "3.1.  Connection Setup\n"
    "\n"
    "   A connection progresses through a series of states during its\n"
    "   lifetime.  The endpoint in the LISTEN state waits for a matching\n"
    "   request before it responds.\n"
    "\n"
    "   If the endpoint receives an unexpected reset it returns to the\n"
    "   LISTEN state and discards the pending request.\n"
)


class TestExactMatch:
    def test_verbatim_passage(self):
        passage = "The endpoint in the LISTEN state waits for a matching"
        span = anchor_passage(passage, DOC)
        assert span is not None
        assert span.match_kind == "exact"
        assert span.similarity == 1.0
        assert DOC[span.span[0] : span.span[1]] == passage
        assert span.quote == passage

    def test_first_occurrence_wins(self):
        text = "alpha beta gamma alpha beta"
        span = anchor_passage("alpha beta", text)
        assert span is not None and span.span == (0, 10)

    def test_surrounding_whitespace_stripped(self):
        span = anchor_passage("  Connection Setup \n", DOC)
        assert span is not None
        assert span.match_kind == "exact"
        assert span.quote == "Connection Setup"


class TestFuzzyMatch:
    def test_reflowed_passage(self):
        # model collapsed the hard line wrap into a single space
        passage = (
            "A connection progresses through a series of states "
            "during its lifetime."
        )
        span = anchor_passage(passage, DOC)
        assert span is not None
        assert span.match_kind == "fuzzy"
        assert 0.85 <= span.similarity < 1.0
        assert span.quote == DOC[span.span[0] : span.span[1]]
        assert "progresses through a series" in span.quote

    def test_small_paraphrase_still_anchors(self):
        passage = "endpoint receives an unexpected reset, it returns to the LISTEN"
        span = anchor_passage(passage, DOC)
        assert span is not None
        assert span.match_kind == "fuzzy"
        assert "unexpected reset" in span.quote

    def test_quote_edges_are_trimmed(self):
        passage = "waits for a matching request before it responds"
        span = anchor_passage(passage, DOC)
        assert span is not None
        assert span.quote == span.quote.strip()

    def test_fuzzy_similarity_capped_below_one(self):
        # near-identical apart from one character; must not round up to 1.0
        text = "x" * 200 + " the connection must be torn down immediately " + "y" * 200
        passage = "the connection must be torn down immediately."
        span = anchor_passage(passage, text)
        assert span is not None
        assert span.match_kind == "fuzzy"
        assert span.similarity <= 0.999999


class TestRejection:
    def test_hallucinated_passage(self):
        span = anchor_passage("the quick brown fox jumps over the lazy dog", DOC)
        assert span is None

    def test_empty_passage(self):
        assert anchor_passage("", DOC) is None
        assert anchor_passage("   \n  ", DOC) is None

    def test_empty_document(self):
        assert anchor_passage("anything", "") is None

    def test_threshold_is_respected(self):
        # reflowed across a line wrap, so only a fuzzy match is possible
        passage = "endpoint receives an unexpected reset it returns to the LISTEN state"
        assert anchor_passage(passage, DOC, threshold=0.2) is not None
        assert anchor_passage(passage, DOC, threshold=1.0) is None


class TestBatch:
    def test_split_into_spans_and_misses(self):
        passages = [
            "Connection Setup",
            "completely unrelated fabricated sentence here",
            "discards the pending request",
        ]
        spans, misses = anchor_passages(passages, DOC)
        assert len(spans) == 2
        assert misses == ("completely unrelated fabricated sentence here",)

    def test_empty_input(self):
        assert anchor_passages([], DOC) == ((), ())


class TestQuoteInvariant:
    """Every returned quote must equal the exact slice at the span."""

    @given(seed=st.integers(0, 2**20))
    @settings(max_examples=60, deadline=None)
    def test_quote_equals_slice(self, seed):
        rng = random.Random(seed)
        words = [
            "connection", "state", "segment", "reset", "timer", "endpoint",
            "request", "response", "LISTEN", "CLOSED", "queue", "window",
        ]
        text = " ".join(rng.choice(words) for _ in range(rng.randint(20, 120)))
        start = rng.randint(0, max(0, len(text) - 40))
        passage = text[start : start + rng.randint(10, 60)]
        if rng.random() < 0.5 and len(passage) > 10:
            # corrupt a character so the fuzzy path is exercised too
            pos = rng.randint(1, len(passage) - 2)
            passage = passage[:pos] + "#" + passage[pos + 1 :]
        span = anchor_passage(passage, text)
        if span is not None:
            assert span.quote == text[span.span[0] : span.span[1]]
            assert span.match_kind in ("exact", "fuzzy")
            if span.match_kind == "exact":
                assert span.similarity == 1.0
            else:
                assert span.similarity < 1.0

    def test_corpus_passage(self, corpus_document):
        document = corpus_document("RFC2637")
        passage = "The loser will immediately close"
        span = anchor_passage(passage, document.normalized_text)
        assert span is not None
        assert span.match_kind == "exact"
        assert (
            document.normalized_text[span.span[0] : span.span[1]] == passage
        )
