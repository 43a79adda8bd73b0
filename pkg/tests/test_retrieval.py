"""Deterministic embeddings, indexing, and top-k retrieval."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfcweave.errors import DimensionMismatch, EmptyInput, InvalidConfig
from rfcweave.ingest import load_rfc
from rfcweave.partition import Fragment, estimate_size, partition
from rfcweave.retrieval import (
    FALLBACK_PROVIDER_ID,
    EmbeddingVector,
    HashEmbedder,
    build_index,
    load_index,
    save_index,
    top_k,
)

from conftest import CORPUS
from oracles import cosine, exhaustive_top_k

WORDS = [
    "packet", "segment", "window", "reset", "listen", "handshake",
    "timer", "retransmit", "acknowledge", "stream", "congestion", "probe",
]


def fragment(fid: str, text: str) -> Fragment:
    return Fragment(
        fragment_id=fid,
        section_path=("1",),
        span=(0, len(text)),
        text=text,
        size_estimate=estimate_size(text),
        contains_diagram=False,
    )


def random_fragments(rng: random.Random, count: int) -> list[Fragment]:
    out = []
    for i in range(count):
        text = " ".join(rng.choices(WORDS, k=rng.randint(3, 30)))
        out.append(fragment(f"fr-{i:010d}"[:13], text))
    return out


class TestEmbedder:
    def test_deterministic(self):
        embedder = HashEmbedder()
        assert embedder.embed("TCP connection") == embedder.embed("TCP connection")

    def test_unit_norm_nonzero(self):
        vector = HashEmbedder().embed("x")
        norm = math.sqrt(sum(v * v for v in vector.values))
        assert norm == pytest.approx(1.0, abs=1e-9)
        assert vector.dim == 512
        assert vector.provider_id == FALLBACK_PROVIDER_ID

    def test_empty_text_rejected(self):
        with pytest.raises(EmptyInput):
            HashEmbedder().embed("")

    def test_tiny_dim_rejected(self):
        with pytest.raises(InvalidConfig):
            HashEmbedder(dim=4)

    def test_related_text_scores_above_unrelated(self):
        embedder = HashEmbedder()
        query = embedder.embed("TCP connection").values
        near = embedder.embed("TCP connection establishment").values
        far = embedder.embed("pitch of bird song").values
        assert cosine(list(query), list(near)) > cosine(list(query), list(far))


class TestIndex:
    def test_duplicate_ids_rejected(self):
        frags = [fragment("fr-aaaaaaaaaa", "one"), fragment("fr-aaaaaaaaaa", "two")]
        with pytest.raises(InvalidConfig):
            build_index(frags, HashEmbedder())

    def test_entries_follow_fragment_order(self):
        frags = random_fragments(random.Random(5), 6)
        index = build_index(frags, HashEmbedder())
        assert [fid for fid, _ in index.entries] == [f.fragment_id for f in frags]

    def test_save_load_round_trip(self, tmp_path):
        index = build_index(random_fragments(random.Random(7), 5), HashEmbedder())
        path = tmp_path / "index.json"
        save_index(index, path)
        loaded = load_index(path, expected_provider_id=FALLBACK_PROVIDER_ID)
        assert loaded.provider_id == index.provider_id
        assert [fid for fid, _ in loaded.entries] == [fid for fid, _ in index.entries]
        for (_, a), (_, b) in zip(loaded.entries, index.entries):
            assert a.values == pytest.approx(b.values)

    def test_load_with_wrong_provider_rejected(self, tmp_path):
        index = build_index(random_fragments(random.Random(9), 3), HashEmbedder())
        path = tmp_path / "index.json"
        save_index(index, path)
        with pytest.raises(InvalidConfig):
            load_index(path, expected_provider_id="http:some-other-model")


class TestTopK:
    def test_k_zero_empty(self):
        index = build_index(random_fragments(random.Random(1), 4), HashEmbedder())
        assert top_k(index, HashEmbedder().embed("query text"), 0) == []

    def test_negative_k_rejected(self):
        index = build_index(random_fragments(random.Random(1), 2), HashEmbedder())
        with pytest.raises(InvalidConfig):
            top_k(index, HashEmbedder().embed("q"), -1)

    def test_dimension_mismatch(self):
        index = build_index(random_fragments(random.Random(2), 3), HashEmbedder())
        query = EmbeddingVector(values=(1.0,) * 16, dim=16, provider_id="other")
        with pytest.raises(DimensionMismatch):
            top_k(index, query, 2)

    def test_exclusion(self):
        frags = random_fragments(random.Random(3), 6)
        embedder = HashEmbedder()
        index = build_index(frags, embedder)
        query = embedder.embed(frags[2].text)
        unrestricted = top_k(index, query, 1)
        assert unrestricted[0][0] == frags[2].fragment_id  # self is rank 1
        excluded = top_k(index, query, len(frags), exclude={frags[2].fragment_id})
        assert frags[2].fragment_id not in [fid for fid, _ in excluded]

    def test_matches_exhaustive_oracle_on_random_indexes(self):
        rng = random.Random(20260814)
        embedder = HashEmbedder(dim=64)
        for trial in range(100):
            frags = random_fragments(rng, rng.randint(1, 12))
            index = build_index(frags, embedder)
            query = embedder.embed(" ".join(rng.choices(WORDS, k=4)))
            k = rng.randint(0, len(frags) + 2)
            exclude = {
                f.fragment_id for f in frags if rng.random() < 0.25
            }
            got = top_k(index, query, k, exclude=exclude)
            want = exhaustive_top_k(
                [(fid, list(vec.values)) for fid, vec in index.entries],
                list(query.values),
                k,
                exclude,
            )
            assert [fid for fid, _ in got] == [fid for fid, _ in want], f"trial {trial}"
            for (_, a), (_, b) in zip(got, want):
                assert a == pytest.approx(b, abs=1e-9)

    @given(seed=st.integers(min_value=0, max_value=2**20), k=st.integers(0, 8))
    @settings(max_examples=30, deadline=None)
    def test_prefix_property(self, seed, k):
        rng = random.Random(seed)
        embedder = HashEmbedder(dim=32)
        index = build_index(random_fragments(rng, rng.randint(1, 8)), embedder)
        query = embedder.embed(" ".join(rng.choices(WORDS, k=3)))
        smaller = top_k(index, query, k)
        larger = top_k(index, query, k + 1)
        assert larger[: len(smaller)] == smaller

    def test_corpus_scale_smoke(self):
        document = load_rfc(str(CORPUS["RFC9293"]))
        fragments = partition(document, 3000)
        embedder = HashEmbedder()
        index = build_index(fragments, embedder)
        query = embedder.embed(fragments[0].text)
        hits = top_k(index, query, 4, exclude={fragments[0].fragment_id})
        assert len(hits) == 4
        assert all(-1.0 <= score <= 1.0 + 1e-9 for _, score in hits)
        assert fragments[0].fragment_id not in [fid for fid, _ in hits]
