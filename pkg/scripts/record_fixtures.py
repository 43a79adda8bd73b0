"""Regenerate the replay fixtures under fixtures/llm/.

Runs the full pipeline in record mode against each bundled corpus file,
with the provider replaced by a deterministic scripted backend driven by
fixture_plan.py.  The backend answers the three stage prompts the way a
careful model would: summaries quote the planned sentences and enumerate
diagram arrows, extraction emits the planned state machine with real
segment-id citations, and grounding returns passages copied verbatim from
the prompt's own source material (plus the planned whitespace-damaged and
fabricated ones).

Usage:  python3 scripts/record_fixtures.py
Writes fixtures/llm/*.json and prints one line per corpus file.
"""

from __future__ import annotations

import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

import httpx

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "scripts"))
sys.path.insert(0, str(ROOT / "src"))

import fixture_plan  # noqa: E402
from fixture_plan import PLANS, PlannedEdge, RfcPlan  # noqa: E402
from rfcweave import (  # noqa: E402
    DiffOptions,
    canonicalize_state_name,
    detect_diagram,
    diff,
    load_config,
    load_rfc,
    merge_reference_graphs,
    parse_diagram,
    run_pipeline,
    to_summary_graph,
)
from rfcweave.graph import edge_id  # noqa: E402
from rfcweave.pipeline import make_gateway  # noqa: E402

FIXED_CLOCK = "2026-08-14T00:00:00+00:00"

PLAN_BY_ID: dict[str, RfcPlan] = {p.rfc_id: p for p in PLANS}

_SEGMENT_BLOCK_RE = re.compile(r"^\[(seg-fr-[0-9a-f]{10})\]$", re.MULTILINE)
_FRAGMENT_BLOCK_RE = re.compile(r"^--- (fr-[0-9a-f]{10}) ---$", re.MULTILINE)
_TRANSITION_RE = re.compile(
    r'^transition (e-[0-9a-f]{12}): (.+?) -> (.+?) on "(.*)"$\n'
    r"^  cited segments: (.*)$",
    re.MULTILINE,
)


def flex_re(sentence: str) -> re.Pattern:
    return re.compile(r"\s+".join(re.escape(w) for w in sentence.split()))


def split_blocks(text: str, marker: re.Pattern) -> dict[str, str]:
    """Map block id -> block body for `[id]` / `--- id ---` style listings."""
    out: dict[str, str] = {}
    matches = list(marker.finditer(text))
    for i, m in enumerate(matches):
        start = m.end() + 1
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        out[m.group(1)] = text[start:end].strip("\n")
    return out


class ScriptedBackend:
    """Answers the pipeline's prompts from the corpus plan."""

    def __call__(self, request: httpx.Request) -> httpx.Response:
        prompt = json.loads(request.content)["messages"][0]["content"]
        first_line = prompt.split("\n", 1)[0]
        if first_line == "template: summarize.v1":
            text = self.summarize(prompt)
        elif first_line in ("template: extract.v1", "template: extract.v2"):
            text = self.extract(prompt)
        elif first_line == "template: ground.v1":
            text = self.ground(prompt)
        else:
            raise AssertionError(f"unexpected prompt kind: {first_line!r}")
        return httpx.Response(
            200, json={"choices": [{"message": {"content": text}}]}
        )

    # -- summarize -----------------------------------------------------------

    def summarize(self, prompt: str) -> str:
        rfc_id = re.search(r"^RFC: (\S+)$", prompt, re.MULTILINE).group(1)
        section = re.search(r"^Section path: (.*)$", prompt, re.MULTILINE).group(1)
        body = prompt.split("Fragment:\n", 1)[1]
        fragment_text = body.split("\n\nRelated context", 1)[0]
        plan = PLAN_BY_ID[rfc_id]

        parts: list[str] = []
        _, spans = detect_diagram(fragment_text)
        for start, end in spans:
            graph = to_summary_graph(parse_diagram(fragment_text[start:end]), rfc_id)
            lines = []
            for t in graph.transitions:
                if (t.source, t.target, t.event) in plan.omit_from_figures:
                    continue
                line = f'  {t.source} -> {t.target} on "{t.event}"'
                if t.actions:
                    line += f" / {'; '.join(t.actions)}"
                lines.append(line)
            names = ", ".join(s.name for s in graph.states)
            parts.append(
                "The fragment contains a state diagram with states "
                + names
                + ". Its arrows are:\n"
                + "\n".join(lines)
            )
        quoted = [
            s for s in plan.quotable_sentences() if flex_re(s).search(fragment_text)
        ]
        if quoted:
            parts.append(
                "Key statements, kept verbatim: " + " ".join(quoted)
            )
        if not parts:
            return (
                f"The fragment under {section} is general prose or front matter;"
                " it names no protocol states and no transitions."
            )
        return "\n".join(parts)

    # -- extract ---------------------------------------------------------------

    def extract(self, prompt: str) -> str:
        rfc_id = re.search(r"fragments of (\S+),", prompt).group(1)
        plan = PLAN_BY_ID[rfc_id]
        segments = split_blocks(prompt.split("Summaries:\n", 1)[1], _SEGMENT_BLOCK_RE)

        def resolve(marker: str) -> list[str]:
            if marker.startswith("fig:"):
                src, tgt, event = marker[4:].split("|")
                needle = f'{src} -> {tgt} on "{event}"'
            else:
                needle = marker[5:]  # "text:"
            return [sid for sid, body in segments.items() if needle in body]

        transitions = []
        for edge in plan.edges:
            citations: list[str] = []
            for marker in edge.cites:
                for sid in resolve(marker):
                    if sid not in citations:
                        citations.append(sid)
            assert citations, (rfc_id, edge.source, edge.target, edge.event)
            entry: dict = {
                "source": edge.source,
                "target": edge.target,
                "event": edge.event,
                "origin": edge.origin,
                "citations": citations,
            }
            if edge.conditions:
                entry["conditions"] = list(edge.conditions)
            if edge.actions:
                entry["actions"] = list(edge.actions)
            if edge.reasoning:
                entry["reasoning"] = edge.reasoning
            transitions.append(entry)

        payload = {"states": [dict(s) for s in plan.states], "transitions": transitions}
        return "```json\n" + json.dumps(payload, indent=2) + "\n```"

    # -- ground ------------------------------------------------------------------

    def ground(self, prompt: str) -> str:
        rfc_id = re.search(r"passages of (\S+)", prompt).group(1)
        plan = PLAN_BY_ID[rfc_id]
        fragments = split_blocks(
            prompt.split("Source text by fragment id:", 1)[1], _FRAGMENT_BLOCK_RE
        )
        by_key = {
            (canonicalize_state_name(e.source), canonicalize_state_name(e.target), e.event): e
            for e in plan.edges
        }

        out: dict[str, dict[str, list[str]]] = {}
        for m in _TRANSITION_RE.finditer(prompt):
            tid, src, tgt, event, cited_csv = m.groups()
            edge = by_key[(src, tgt, event)]
            cited = [s.strip() for s in cited_csv.split(",") if s.strip() and s.strip() != "(none)"]
            per_segment: dict[str, list[str]] = {}

            def attach(sid: str, passage: str) -> None:
                per_segment.setdefault(sid, []).append(passage)

            for sentence in edge.passages:
                emitted = plan.perturb.get(sentence)
                home = None
                exact = None
                for sid in cited:
                    body = fragments.get(sid[4:], "")
                    found = flex_re(sentence).search(body)
                    if found:
                        home = sid
                        exact = found.group(0)
                        break
                if emitted is None:
                    # quote the exact source text, wrapping and all
                    assert exact is not None, (rfc_id, tid, sentence[:40])
                    attach(home, exact)
                else:
                    attach(home or cited[0], emitted)
            for passage in edge.fabricated:
                attach(cited[0], passage)
            out[tid] = per_segment
        return json.dumps(out, indent=2)


# ---------------------------------------------------------------------------
# post-run checks
# ---------------------------------------------------------------------------

TABLE_TARGETS = {  # rfc_id -> (missing nodes, missing edges)
    "RFC2637": (0, 6),
    "RFC4341": (0, 1),
    "RFC9000": (0, 2),
    "RFC9293": (0, 1),
}


def reference_graph(document):
    _, spans = detect_diagram(document.normalized_text)
    graphs = [
        to_summary_graph(
            parse_diagram(document.normalized_text[s:e]),
            document.rfc_id,
            document_text=document.normalized_text,
            span_offset=s,
        )
        for s, e in spans
    ]
    merged, _ = merge_reference_graphs(graphs, document.rfc_id)
    return merged


def check_run(plan: RfcPlan, result) -> dict:
    graph = result.graph
    assert graph is not None and result.report["status"] == "complete", plan.rfc_id
    assert len(graph.transitions) == len(plan.edges), (
        plan.rfc_id, len(graph.transitions), len(plan.edges)
    )

    document = result.document
    for t in graph.transitions:
        for _sid, spans in t.provenance:
            for span in spans:
                lo, hi = span.span
                assert document.normalized_text[lo:hi] == span.quote, (plan.rfc_id, t.event)

    expected_ungrounded = set()
    if plan.rfc_id == "RFC9293":
        expected_ungrounded = {edge_id("FIN-WAIT-2", "CLOSED", "aborted close")}
        green = next(
            t for t in graph.transitions
            if (t.source, t.target, t.event) == ("SYN-RECEIVED", "LISTEN", "rcv SYN")
        )
        kinds = sorted(
            span.match_kind for _sid, spans in green.provenance for span in spans
        )
        assert kinds == ["exact", "fuzzy"], kinds
    got_ungrounded = {
        edge_id(t.source, t.target, t.event) for t in graph.transitions if t.ungrounded
    }
    assert got_ungrounded == expected_ungrounded, (plan.rfc_id, got_ungrounded)
    expected_misses = 1 if plan.rfc_id == "RFC9293" else 0
    assert len(result.report["unanchored_passages"]) == expected_misses, plan.rfc_id

    report = diff(graph, reference_graph(document), DiffOptions())
    want = TABLE_TARGETS[plan.rfc_id]
    got = (report.counts["missing_nodes"], report.counts["missing_edges"])
    assert got == want, (plan.rfc_id, got, want)
    return {
        "calls": result.report["counts"],
        "diff": got,
        "extra_edges": report.counts["extra_edges"],
    }


def main() -> None:
    fixtures_dir = ROOT / "fixtures" / "llm"
    if fixtures_dir.exists():
        shutil.rmtree(fixtures_dir)

    backend = ScriptedBackend()
    for plan in PLANS:
        config = load_config(
            None,
            env={},
            overrides={
                "gateway_mode": "record",
                "api_base": "http://scripted.invalid/v1",
                "fixtures_dir": str(fixtures_dir),
            },
        )
        gateway = make_gateway(
            config, transport=httpx.MockTransport(backend), clock=lambda: FIXED_CLOCK
        )
        out_dir = tempfile.mkdtemp(prefix="record-")
        try:
            result = run_pipeline(
                str(ROOT / "fixtures" / "rfcs" / plan.filename),
                config,
                out_dir=out_dir,
                gateway=gateway,
            )
            stats = check_run(plan, result)
        finally:
            shutil.rmtree(out_dir, ignore_errors=True)
        counts = stats["calls"]
        print(
            f"{plan.rfc_id}: {counts['summarize_calls']} summaries,"
            f" {counts['states']} states, {counts['transitions']} transitions,"
            f" missing={stats['diff']}, extra_edges={stats['extra_edges']}"
        )
    total = len(list(fixtures_dir.glob("*.json")))
    print(f"recorded {total} fixtures into {fixtures_dir}")


if __name__ == "__main__":
    main()
