"""Document loading, text normalization, and section-tree construction."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfcweave.errors import NotFound, NotText
from rfcweave.ingest import build_section_tree, load_rfc, normalize

from conftest import CORPUS

# text shaped like what normalization actually sees: words, newlines, page
# furniture characters, stray tabs and carriage returns
_raw_text = st.text(
    alphabet=st.sampled_from(list("abcdefghij XYZ0123456789.+-|\n\r\f\t ")),
    max_size=400,
)


class TestNormalize:
    def test_blank_run_collapse_offsets(self):
        normalized, offset_map = normalize("a\n\n\n\nb")
        assert normalized == "a\n\nb"
        assert offset_map == (0, 1, 4, 5)

    def test_already_normalized_is_identity(self):
        text = "1.  Intro\n\n   Some body text here.\n"
        normalized, offset_map = normalize(text)
        assert normalized == text
        assert offset_map == tuple(range(len(text)))

    def test_empty_input(self):
        assert normalize("") == ("", ())

    def test_crlf_and_form_feed_removed(self):
        normalized, _ = normalize("one\r\ntwo\f\nthree\n")
        assert "\r" not in normalized
        assert "\f" not in normalized
        assert "one" in normalized and "three" in normalized

    @given(_raw_text)
    @settings(max_examples=150, deadline=None)
    def test_offset_map_strictly_monotone_and_faithful(self, raw):
        normalized, offset_map = normalize(raw)
        assert len(offset_map) == len(normalized)
        assert all(a < b for a, b in zip(offset_map, offset_map[1:]))
        # deletion-and-collapse only: every kept character is the raw one
        for i, raw_idx in enumerate(offset_map):
            assert raw[raw_idx] == normalized[i]

    @given(_raw_text)
    @settings(max_examples=100, deadline=None)
    def test_deterministic(self, raw):
        assert normalize(raw) == normalize(raw)

    def test_page_block_stripped_and_paragraph_rejoined(self):
        # synthetic two-page document; the paragraph continues across the break
        raw = (
            "1.  Greetings\n\n"
            "   This sentence starts on the first page and must\n"
            "\n\nAuthor, et al.               Informational                      [Page 1]\n"
            "\x0c\n"
            "RFC 9999                        Greetings                      July 2026\n"
            "\n"
            "   never be torn apart by pagination.\n"
        )
        normalized, _ = normalize(raw)
        assert "[Page" not in normalized
        assert "\x0c" not in normalized
        assert "July 2026" not in normalized
        assert "first page and must\n   never be torn apart" in normalized


class TestSectionTree:
    def test_no_headings_single_node(self):
        tree = build_section_tree("hello world")
        assert len(tree) == 1
        assert tree[0].number == ""
        assert tree[0].span == (0, 11)

    def test_empty_text_empty_tree(self):
        assert build_section_tree("") == ()

    def test_nesting_and_siblings(self):
        text = "1.  One\n\n   body a\n\n1.1.  Sub\n\n   body b\n\n2.  Two\n\n   body c\n"
        tree = build_section_tree(text)
        assert [n.number for n in tree] == ["1", "2"]
        assert [c.number for c in tree[0].children] == ["1.1"]
        one, two = tree
        sub = one.children[0]
        assert one.span[0] <= sub.span[0] and sub.span[1] <= one.span[1]
        assert one.span[1] <= two.span[0]

    @pytest.mark.parametrize(
        "rfc_id,number,title_word",
        [
            ("RFC9293", "3.3.2", "State"),
            ("RFC2637", "3.1.3", None),
            ("RFC4341", "2.1", None),
        ],
    )
    def test_corpus_sections_present(self, corpus_document, rfc_id, number, title_word):
        document = corpus_document(rfc_id)
        node = document.find_section(number)
        assert node is not None
        if title_word:
            assert title_word in node.title

    def test_corpus_top_level_coverage(self, corpus_document):
        # front/back matter plus numbered sections tile the whole text
        for rfc_id in CORPUS:
            document = corpus_document(rfc_id)
            spans = sorted(n.span for n in document.section_tree)
            assert spans[0][0] == 0
            assert spans[-1][1] == len(document.normalized_text)
            for (_, end), (start, _) in zip(spans, spans[1:]):
                assert end == start


class TestLoadRfc:
    def test_local_file_fields(self, corpus_document):
        document = corpus_document("RFC9293")
        assert document.rfc_id == "RFC9293"
        assert document.source_kind == "local_file"
        assert document.fetched_at is None
        assert "\f" not in document.normalized_text
        assert "[Page" not in document.normalized_text

    def test_to_raw_span_recovers_text(self, corpus_document):
        document = corpus_document("RFC2637")
        needle = "The loser will immediately close"
        start = document.normalized_text.find(needle)
        assert start != -1
        raw_start, raw_end = document.to_raw_span((start, start + len(needle)))
        assert document.raw_text[raw_start:raw_end] == needle

    def test_missing_source_not_found(self, tmp_path):
        with pytest.raises(NotFound):
            load_rfc(str(tmp_path / "nope.txt"))
        with pytest.raises(NotFound):
            load_rfc("definitely-not-an-rfc-number")

    def test_binary_input_rejected(self, tmp_path):
        path = tmp_path / "blob.txt"
        path.write_bytes(b"\x00\x01\x02\xff" * 64)
        with pytest.raises(NotText):
            load_rfc(str(path))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("", encoding="utf-8")
        document = load_rfc(str(path))
        assert document.normalized_text == ""
        assert document.section_tree == ()

    def test_fetch_caches_then_reads_offline(self, tmp_path):
        calls = []

        def fake_fetch(url: str) -> str:
            calls.append(url)
            return "1.  Hello\n\n   A tiny fetched document body.\n"

        cache = tmp_path / "cache"
        first = load_rfc("9999", cache_dir=cache, fetch=fake_fetch)
        assert first.rfc_id == "RFC9999"
        assert first.source_kind == "rfc_editor_fetch"
        assert first.fetched_at is not None
        assert len(calls) == 1
        meta = json.loads((cache / "rfc9999.meta.json").read_text())
        assert meta["url"] == calls[0]

        def explode(url: str) -> str:
            raise AssertionError("cache should have been used")

        second = load_rfc("9999", cache_dir=cache, fetch=explode)
        assert second.normalized_text == first.normalized_text
