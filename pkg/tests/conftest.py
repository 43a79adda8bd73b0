"""Shared fixtures: corpus paths, replay runs, a toy RFC with a scripted
provider, and a hard network guard for the whole suite."""

from __future__ import annotations

import json
import re
import socket
from pathlib import Path

import httpx
import pytest

from rfcweave.config import load_config
from rfcweave.graph import edge_id
from rfcweave.ingest import load_rfc
from rfcweave.pipeline import make_gateway, run_pipeline

REPO_ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = REPO_ROOT / "fixtures" / "rfcs"
LLM_FIXTURES_DIR = REPO_ROOT / "fixtures" / "llm"
ORACLE_DIAGRAMS = REPO_ROOT / "fixtures" / "oracles" / "diagrams.json"

CORPUS = {
    "RFC9293": CORPUS_DIR / "rfc9293.txt",
    "RFC2637": CORPUS_DIR / "rfc2637.txt",
    "RFC4341": CORPUS_DIR / "rfc4341.txt",
    "RFC9000": CORPUS_DIR / "rfc9000.txt",
}

_LOOPBACK = ("127.0.0.1", "::1", "localhost")


@pytest.fixture(scope="session", autouse=True)
def no_network():
    """Refuse any non-loopback socket connection for the whole session."""
    real_connect = socket.socket.connect

    def guarded(self, address):
        host = address[0] if isinstance(address, tuple) else address
        if isinstance(host, (str, bytes)) and not isinstance(address, tuple):
            return real_connect(self, address)  # unix domain socket
        if host in _LOOPBACK:
            return real_connect(self, address)
        raise AssertionError(f"test suite attempted network access to {address!r}")

    socket.socket.connect = guarded
    try:
        yield "active"
    finally:
        socket.socket.connect = real_connect


def replay_config(**overrides):
    base = {
        "gateway_mode": "replay",
        "fixtures_dir": str(LLM_FIXTURES_DIR),
    }
    base.update(overrides)
    return load_config(env={}, overrides=base)


@pytest.fixture(scope="session")
def replay_run(tmp_path_factory):
    """Run the recorded pipeline once per RFC and cache (result, run_dir)."""
    runs_root = tmp_path_factory.mktemp("replay-runs")
    cache: dict[str, tuple] = {}

    def run(rfc_id: str):
        if rfc_id not in cache:
            result = run_pipeline(
                str(CORPUS[rfc_id]), replay_config(), out_dir=runs_root
            )
            cache[rfc_id] = (result, runs_root / result.manifest.run_id)
        return cache[rfc_id]

    return run


@pytest.fixture(scope="session")
def corpus_document():
    cache: dict[str, object] = {}

    def load(rfc_id: str):
        if rfc_id not in cache:
            cache[rfc_id] = load_rfc(str(CORPUS[rfc_id]))
        return cache[rfc_id]

    return load


# -- toy RFC with a scripted provider -----------------------------------------

TOY_SENTENCE = "An endpoint in the COLD state moves to WARM when it receives a ping."

TOY_RFC = f"""\
1.  Introduction

   This document describes a very small protocol used only to exercise
   test tooling.  It has two states and a single transition between
   them, which is plenty for checking call accounting end to end.

2.  State Machine

   {TOY_SENTENCE}
   No other transition exists, and the WARM state is terminal for the
   lifetime of the association described in this memo.

3.  Security Considerations

   The protocol carries no data, so the only consideration is that a
   forged ping can move a listener out of the COLD state prematurely.
"""

_SEGMENT_ID_RE = re.compile(r"^\[(seg-fr-[0-9a-f]{10})\]$", re.MULTILINE)


class ToyBackend:
    """Scripted provider for the toy RFC: answers each stage from the
    prompt itself, so record-mode tests need no canned fixture files.

    fail_marker, when set, 401s any summarize request whose fragment body
    contains the marker; that is how tests manufacture a skipped fragment.
    """

    def __init__(self, ground_passage: str = TOY_SENTENCE, fail_marker: str = ""):
        self.ground_passage = ground_passage
        self.fail_marker = fail_marker
        self.calls: list[str] = []

    def __call__(self, request: httpx.Request) -> httpx.Response:
        prompt = json.loads(request.content)["messages"][0]["content"]
        stage = prompt.splitlines()[0].removeprefix("template: ")
        self.calls.append(stage)
        if stage.startswith("summarize"):
            fragment_body = prompt.split("Fragment:", 1)[-1].split("Related context", 1)[0]
            if self.fail_marker and self.fail_marker in fragment_body:
                return httpx.Response(401, text="scripted failure")
            text = "States COLD and WARM; ping moves COLD to WARM."
        elif stage.startswith("extract"):
            sids = _SEGMENT_ID_RE.findall(prompt)
            text = json.dumps(
                {
                    "states": [
                        {"name": "COLD", "kind": "normal"},
                        {"name": "WARM", "kind": "normal"},
                    ],
                    "transitions": [
                        {
                            "source": "COLD",
                            "target": "WARM",
                            "event": "receive ping",
                            "origin": "other_text",
                            "citations": sids[:1],
                        }
                    ],
                }
            )
        elif stage.startswith("ground"):
            tid = edge_id("COLD", "WARM", "receive ping")
            sid_match = re.search(r"cited segments: (\S+)", prompt)
            sid = sid_match.group(1) if sid_match else "seg-unknown"
            text = json.dumps({tid: {sid: [self.ground_passage]}})
        else:
            raise AssertionError(f"unexpected stage {stage!r}")
        return httpx.Response(
            200, json={"choices": [{"message": {"content": text}}]}
        )


@pytest.fixture
def toy_rfc_path(tmp_path):
    path = tmp_path / "rfc9999.txt"
    path.write_text(TOY_RFC, encoding="utf-8")
    return path


@pytest.fixture
def toy_record_run(toy_rfc_path, tmp_path):
    """Record-mode pipeline over the toy RFC through a scripted transport."""

    def run(backend: ToyBackend | None = None, **config_overrides):
        backend = backend or ToyBackend()
        overrides = {
            "gateway_mode": "record",
            "api_base": "http://scripted.invalid/v1",
            "fixtures_dir": str(tmp_path / "toy-fixtures"),
        }
        overrides.update(config_overrides)
        config = load_config(env={}, overrides=overrides)
        gateway = make_gateway(config, transport=httpx.MockTransport(backend))
        result = run_pipeline(
            str(toy_rfc_path), config, out_dir=tmp_path / "toy-runs", gateway=gateway
        )
        return result, backend, Path(config.fixtures_dir)

    return run


@pytest.fixture
def toy_partial_replay(toy_record_run, toy_rfc_path, tmp_path):
    """A replay run turned partial by deleting one summarize fixture.

    The reduced extract/ground fixtures come from a second recording in
    which that fragment's summarize request failed, so replay proceeds past
    the missing fixture with one fragment skipped.
    """

    def run():
        fixtures = tmp_path / "toy-fixtures"
        _, _, _ = toy_record_run()
        full_hashes = {
            p.name for p in fixtures.glob("*.json")
            if json.loads(p.read_text())["stage"] == "summarize"
        }
        reduced_dir = tmp_path / "toy-fixtures-reduced"
        toy_record_run(
            ToyBackend(fail_marker="Security Considerations"),
            fixtures_dir=str(reduced_dir),
        )
        reduced_hashes = {
            p.name for p in reduced_dir.glob("*.json")
            if json.loads(p.read_text())["stage"] == "summarize"
        }
        victims = full_hashes - reduced_hashes
        assert len(victims) == 1, victims
        for p in reduced_dir.glob("*.json"):
            target = fixtures / p.name
            if not target.exists():
                target.write_text(p.read_text(), encoding="utf-8")
        (fixtures / victims.pop()).unlink()

        config = load_config(
            env={},
            overrides={"gateway_mode": "replay", "fixtures_dir": str(fixtures)},
        )
        out = tmp_path / "toy-partial-runs"
        result = run_pipeline(str(toy_rfc_path), config, out_dir=out)
        return result, out / result.manifest.run_id

    return run
