"""Run configuration: defaults, JSON config file, environment, CLI overrides.

Precedence is lowest to highest: built-in defaults, config file values,
``RFCWEAVE_``-prefixed environment variables, explicit CLI flags.  Later
layers only touch keys they actually set.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .errors import InvalidConfig

ENV_PREFIX = "RFCWEAVE_"

# Fields whose env/file values must be coerced to these types.
_INT_FIELDS = {
    "max_fragment_size",
    "min_fragment_size",
    "triviality_floor",
    "retrieval_k",
    "max_retries",
    "request_budget",
    "embedding_dim",
}
_FLOAT_FIELDS = {
    "temperature",
    "retry_base_delay",
    "fuzzy_threshold",
    "node_similarity_threshold",
    "edge_jaccard_threshold",
}


@dataclass
class RunConfig:
    """Tunable knobs for one extraction run."""

    model_id: str = "summary-extractor-1"
    gateway_mode: str = "replay"  # live | record | replay
    fixtures_dir: str = "fixtures/llm"
    cache_dir: str = ""  # empty string means platform default
    api_base: str = ""
    api_key: str = ""

    max_fragment_size: int = 3000
    min_fragment_size: int = 256
    triviality_floor: int = 30

    retrieval_k: int = 4
    embedding_dim: int = 512

    temperature: float = 0.0
    max_retries: int = 3
    retry_base_delay: float = 1.0
    request_budget: int = 200

    prompt_version: str = "v1"

    fuzzy_threshold: float = 0.85
    node_similarity_threshold: float = 0.9
    edge_jaccard_threshold: float = 0.5

    def validate(self) -> None:
        if self.max_fragment_size < 256:
            raise InvalidConfig(
                f"max_fragment_size must be >= 256, got {self.max_fragment_size}"
            )
        if self.min_fragment_size < 0:
            raise InvalidConfig("min_fragment_size must be non-negative")
        if self.gateway_mode not in ("live", "record", "replay"):
            raise InvalidConfig(f"unknown gateway_mode {self.gateway_mode!r}")
        if self.prompt_version not in ("v1", "v2"):
            raise InvalidConfig(f"unknown prompt_version {self.prompt_version!r}")
        if not 0.0 <= self.fuzzy_threshold <= 1.0:
            raise InvalidConfig("fuzzy_threshold must be in [0, 1]")
        if not 0.0 <= self.node_similarity_threshold <= 1.0:
            raise InvalidConfig("node_similarity_threshold must be in [0, 1]")
        if not 0.0 <= self.edge_jaccard_threshold <= 1.0:
            raise InvalidConfig("edge_jaccard_threshold must be in [0, 1]")
        if self.retrieval_k < 1:
            raise InvalidConfig("retrieval_k must be >= 1")
        # zero is allowed: it means "replay only", and live/record calls
        # fail fast with BudgetExceeded before touching the network
        if self.request_budget < 0:
            raise InvalidConfig("request_budget must be non-negative")
        if self.embedding_dim < 8:
            raise InvalidConfig("embedding_dim must be >= 8")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _coerce(name: str, value: Any) -> Any:
    try:
        if name in _INT_FIELDS:
            return int(value)
        if name in _FLOAT_FIELDS:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"bad value for {name}: {value!r}") from exc
    if isinstance(value, (str, int, float)):
        return str(value) if name not in _INT_FIELDS | _FLOAT_FIELDS else value
    raise InvalidConfig(f"bad value for {name}: {value!r}")


def _known_fields() -> set[str]:
    return {f.name for f in dataclasses.fields(RunConfig)}


def load_config(
    config_path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfig:
    """Build a validated RunConfig from the three override layers."""
    cfg = RunConfig()
    names = _known_fields()

    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise InvalidConfig(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("config file must contain a JSON object")
        for key, value in data.items():
            if key not in names:
                raise InvalidConfig(f"unknown config key {key!r}")
            setattr(cfg, key, _coerce(key, value))

    env_map = os.environ if env is None else env
    for name in names:
        env_key = ENV_PREFIX + name.upper()
        if env_key in env_map:
            setattr(cfg, name, _coerce(name, env_map[env_key]))

    if overrides:
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in names:
                raise InvalidConfig(f"unknown config key {key!r}")
            setattr(cfg, key, _coerce(key, value))

    cfg.validate()
    return cfg


def default_cache_dir() -> Path:
    """Platform cache directory for fetched RFC documents."""
    base = os.environ.get("XDG_CACHE_HOME")
    if base:
        return Path(base) / "rfcweave"
    return Path.home() / ".cache" / "rfcweave"
