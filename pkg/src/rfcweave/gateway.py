"""Chat-completion gateway: one interface over a live HTTP provider and a
record/replay fixture store.

Requests are keyed by a content hash of (model_id, prompt, temperature), so
replay needs no network and survives process and platform changes.  Prompt
templates embed their version on the first prompt line, which places the
version inside the hash preimage: editing a template orphans old fixtures
instead of silently replaying them.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import BudgetExceeded, FixtureMiss, InvalidConfig, ProviderError

MODES = ("live", "record", "replay")
PROMPT_EXCERPT_CHARS = 500


@dataclass(frozen=True)
class CompletionRequest:
    model_id: str
    prompt: str
    temperature: float = 0.0
    max_output_size: int = 4096
    # metadata for error messages and fixture bookkeeping; not hashed
    stage: str = ""
    context_label: str = ""


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    provider: str
    request_hash: str


def request_hash(request: CompletionRequest) -> str:
    preimage = json.dumps(
        {
            "model_id": request.model_id,
            "prompt": request.prompt,
            "temperature": request.temperature,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=True,
    )
    return hashlib.sha256(preimage.encode("utf-8")).hexdigest()


class FixtureStore:
    """One JSON record per request hash; writes are atomic."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path(self, digest: str) -> Path:
        return self.directory / f"{digest}.json"

    def load(self, digest: str) -> dict | None:
        path = self.path(digest)
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def save(self, digest: str, record: dict) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(digest)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(record, sort_keys=True, indent=2, ensure_ascii=True) + "\n",
            encoding="utf-8",
        )
        os.replace(tmp, path)


def _utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


class Gateway:
    """mode: live forwards, record forwards and persists, replay serves
    fixtures only.  The budget caps live/record requests per gateway; replay
    costs nothing.  Retries apply to transport failures and 5xx responses
    only: up to max_retries attempts with exponential backoff."""

    def __init__(
        self,
        mode: str,
        fixtures_dir: str | Path,
        api_base: str = "",
        api_key: str = "",
        request_budget: int = 200,
        max_retries: int = 3,
        retry_base_delay: float = 1.0,
        transport=None,
        sleeper: Callable[[float], None] = time.sleep,
        clock: Callable[[], str] = _utc_now,
    ):
        if mode not in MODES:
            raise InvalidConfig(f"unknown gateway mode {mode!r}")
        if mode in ("live", "record") and not api_base:
            raise InvalidConfig(f"mode {mode!r} requires an api_base endpoint")
        self.mode = mode
        self.store = FixtureStore(fixtures_dir)
        self.api_base = api_base.rstrip("/")
        self.api_key = api_key
        self.request_budget = request_budget
        self.max_retries = max_retries
        self.retry_base_delay = retry_base_delay
        self._transport = transport
        self._sleeper = sleeper
        self._clock = clock
        self._client = None
        self._lock = threading.Lock()
        self.calls_used = 0  # live/record requests issued (retries not re-counted)
        self.replay_hits = 0
        self.used_fixture_times: list[str] = []

    # -- provider ------------------------------------------------------------

    def _http_client(self):
        import httpx

        if self._client is None:
            self._client = httpx.Client(transport=self._transport, timeout=120.0)
        return self._client

    def _call_provider(self, request: CompletionRequest) -> str:
        import httpx

        headers = {"content-type": "application/json"}
        if self.api_key:
            headers["authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_size,
        }
        url = f"{self.api_base}/chat/completions"
        last_error: Exception | None = None
        for attempt in range(1, self.max_retries + 1):
            try:
                resp = self._http_client().post(url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                if attempt < self.max_retries:
                    self._sleeper(self.retry_base_delay * 2 ** (attempt - 1))
                continue
            if resp.status_code >= 500:
                last_error = ProviderError(f"provider returned HTTP {resp.status_code}")
                if attempt < self.max_retries:
                    self._sleeper(self.retry_base_delay * 2 ** (attempt - 1))
                continue
            if resp.status_code != 200:
                raise ProviderError(
                    f"provider returned HTTP {resp.status_code}: {resp.text[:200]}"
                )
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise ProviderError(f"malformed provider response: {exc}") from exc
        raise ProviderError(
            f"provider failed after {self.max_retries} attempts: {last_error}"
        )

    # -- public --------------------------------------------------------------

    def complete(self, request: CompletionRequest, mode: str | None = None) -> CompletionResponse:
        mode = mode or self.mode
        if mode not in MODES:
            raise InvalidConfig(f"unknown gateway mode {mode!r}")
        digest = request_hash(request)

        if mode == "replay":
            record = self.store.load(digest)
            if record is None:
                raise FixtureMiss(
                    f"no recorded response for stage {request.stage or '?'}"
                    f" ({request.context_label or 'no label'}), request hash {digest};"
                    f" run in record mode to create it",
                    stage=request.stage,
                    context_label=request.context_label,
                )
            with self._lock:
                self.replay_hits += 1
                if record.get("recorded_at"):
                    self.used_fixture_times.append(record["recorded_at"])
            return CompletionResponse(
                text=record["response_text"], provider="replay", request_hash=digest
            )

        with self._lock:
            if self.calls_used >= self.request_budget:
                raise BudgetExceeded(
                    f"request budget of {self.request_budget} exhausted"
                )
            self.calls_used += 1
        text = self._call_provider(request)
        if mode == "record":
            self.store.save(
                digest,
                {
                    "stage": request.stage,
                    "model_id": request.model_id,
                    "prompt_sha": hashlib.sha256(
                        request.prompt.encode("utf-8")
                    ).hexdigest(),
                    "prompt_excerpt": request.prompt[:PROMPT_EXCERPT_CHARS],
                    "response_text": text,
                    "recorded_at": self._clock(),
                },
            )
        return CompletionResponse(text=text, provider=self.api_base, request_hash=digest)
