"""Fragment embeddings and top-k retrieval.

The default embedder is a deterministic feature-hashed character n-gram
model, so the whole pipeline can run and be tested with no network.  A
remote HTTP provider is available behind the same interface.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InvalidConfig, ProviderUnavailable
from .partition import Fragment

FALLBACK_PROVIDER_ID = "hash-ngram-v1"
FALLBACK_DIM = 512
_NGRAM_SIZES = (3, 4, 5)


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dim: int
    provider_id: str


@dataclass(frozen=True)
class VectorIndex:
    entries: tuple[tuple[str, EmbeddingVector], ...]
    provider_id: str

    @property
    def dim(self) -> int:
        return self.entries[0][1].dim if self.entries else 0


class EmbeddingProvider(Protocol):
    provider_id: str

    def embed(self, text: str) -> EmbeddingVector: ...


class HashEmbedder:
    """Feature-hashed char n-grams; stable across platforms and processes."""

    def __init__(self, dim: int = FALLBACK_DIM):
        if dim < 8:
            raise InvalidConfig("embedding dim must be >= 8")
        self.dim = dim
        self.provider_id = FALLBACK_PROVIDER_ID

    def _features(self, text: str) -> Iterable[str]:
        lowered = text.lower()
        yield lowered  # whole-text feature keeps very short inputs non-zero
        for n in _NGRAM_SIZES:
            for i in range(len(lowered) - n + 1):
                yield lowered[i : i + n]

    def embed(self, text: str) -> EmbeddingVector:
        if text == "":
            raise EmptyInput("cannot embed empty text")
        vec = np.zeros(self.dim, dtype=np.float64)
        for feature in self._features(text):
            digest = hashlib.sha256(feature.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:8], "big") % self.dim
            sign = 1.0 if digest[8] & 1 else -1.0
            vec[idx] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0
            norm = 1.0
        vec /= norm
        return EmbeddingVector(values=tuple(float(x) for x in vec), dim=self.dim, provider_id=self.provider_id)


class HttpEmbedder:
    """Remote embeddings endpoint; responses cached on disk by content hash."""

    def __init__(
        self,
        api_base: str,
        model: str,
        api_key: str = "",
        cache_dir: str | Path | None = None,
        transport=None,
    ):
        if not api_base:
            raise ProviderUnavailable("no embeddings endpoint configured")
        self.api_base = api_base.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.provider_id = f"http:{model}"
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._transport = transport

    def _cache_path(self, text: str) -> Path | None:
        if self.cache_dir is None:
            return None
        key = hashlib.sha256(f"{self.provider_id}\x1f{text}".encode("utf-8")).hexdigest()
        return self.cache_dir / f"{key}.json"

    def embed(self, text: str) -> EmbeddingVector:
        if text == "":
            raise EmptyInput("cannot embed empty text")
        cached = self._cache_path(text)
        if cached is not None and cached.is_file():
            values = json.loads(cached.read_text(encoding="utf-8"))
            return EmbeddingVector(tuple(values), len(values), self.provider_id)
        import httpx

        headers = {"content-type": "application/json"}
        if self.api_key:
            headers["authorization"] = f"Bearer {self.api_key}"
        try:
            client = httpx.Client(transport=self._transport, timeout=60.0)
            resp = client.post(
                f"{self.api_base}/embeddings",
                json={"model": self.model, "input": text},
                headers=headers,
            )
        except Exception as exc:
            raise ProviderUnavailable(f"embeddings request failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProviderUnavailable(f"embeddings endpoint returned HTTP {resp.status_code}")
        values = resp.json()["data"][0]["embedding"]
        if cached is not None:
            cached.parent.mkdir(parents=True, exist_ok=True)
            cached.write_text(json.dumps(values), encoding="utf-8")
        return EmbeddingVector(tuple(float(v) for v in values), len(values), self.provider_id)


def build_index(
    fragments: Sequence[Fragment], provider: EmbeddingProvider
) -> VectorIndex:
    """Embed fragments in span order; ids must be unique."""
    seen: set[str] = set()
    entries = []
    for fragment in fragments:
        if fragment.fragment_id in seen:
            raise InvalidConfig(f"duplicate fragment_id {fragment.fragment_id}")
        seen.add(fragment.fragment_id)
        entries.append((fragment.fragment_id, provider.embed(fragment.text)))
    dims = {v.dim for _, v in entries}
    if len(dims) > 1:
        raise DimensionMismatch(f"mixed dimensions in one index: {sorted(dims)}")
    return VectorIndex(entries=tuple(entries), provider_id=provider.provider_id)


def top_k(
    index: VectorIndex,
    query: EmbeddingVector,
    k: int,
    exclude: frozenset[str] | set[str] = frozenset(),
) -> list[tuple[str, float]]:
    """k best cosine matches, descending; ties go to the earlier fragment."""
    if k < 0:
        raise InvalidConfig("k must be >= 0")
    if index.entries and query.dim != index.dim:
        raise DimensionMismatch(
            f"query dim {query.dim} != index dim {index.dim}"
        )
    if k == 0 or not index.entries:
        return []
    q = np.asarray(query.values, dtype=np.float64)
    qn = float(np.linalg.norm(q))
    scored: list[tuple[float, int, str]] = []
    for position, (fragment_id, vector) in enumerate(index.entries):
        if fragment_id in exclude:
            continue
        v = np.asarray(vector.values, dtype=np.float64)
        vn = float(np.linalg.norm(v))
        score = 0.0 if qn == 0.0 or vn == 0.0 else float(np.dot(q, v) / (qn * vn))
        scored.append((score, position, fragment_id))
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [(fragment_id, score) for score, _, fragment_id in scored[:k]]


def save_index(index: VectorIndex, path: str | Path) -> None:
    payload = {
        "provider_id": index.provider_id,
        "dim": index.dim,
        "entries": [
            {"fragment_id": fid, "values": list(vec.values)}
            for fid, vec in index.entries
        ],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_index(path: str | Path, expected_provider_id: str | None = None) -> VectorIndex:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    provider_id = payload["provider_id"]
    if expected_provider_id is not None and provider_id != expected_provider_id:
        raise InvalidConfig(
            f"index provider {provider_id!r} does not match configured {expected_provider_id!r}"
        )
    entries = tuple(
        (
            entry["fragment_id"],
            EmbeddingVector(tuple(entry["values"]), len(entry["values"]), provider_id),
        )
        for entry in payload["entries"]
    )
    return VectorIndex(entries=entries, provider_id=provider_id)
