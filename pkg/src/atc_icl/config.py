"""Declarative run configuration: YAML loading, digests, and row labels.

A run config names the corpus location, the experiment grid point (strategy,
k, n, prompt blocks, mode, model), and the backend wiring (live, cache,
replay, or mock, plus the on-disk response store). The semantic digest covers
exactly the fields that change what is computed, not where results are
written or which backend serves the responses.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .corpus import Label
from .ensemble import IclConfig
from .errors import ConfigError
from .prompting import PromptConfig, PromptMode
from .selection import SelectionStrategy

CHAT_BACKENDS = ("live", "cache", "replay", "mock")
EMBEDDING_BACKENDS = ("live", "cache", "replay", "hash")
MOCK_MODES = ("gold_echo", "constant")


@dataclass(frozen=True)
class BackendConfig:
    chat: str = "mock"
    mock_mode: str = "gold_echo"
    mock_constant_label: str = Label.PREMISE.display_name
    cache_upstream: str = "live"  # inner backend when chat == "cache"
    embedding: str = "hash"
    embedding_upstream: str = "live"  # inner backend when embedding == "cache"
    embedding_model: str = "text-embedding-ada-002"
    embedding_dim: int = 8
    store_dir: Path | None = None
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "OPENAI_API_KEY"

    def __post_init__(self) -> None:
        if self.chat not in CHAT_BACKENDS:
            raise ConfigError(f"chat backend must be one of {CHAT_BACKENDS}")
        if self.embedding not in EMBEDDING_BACKENDS:
            raise ConfigError(f"embedding backend must be one of {EMBEDDING_BACKENDS}")
        if self.mock_mode not in MOCK_MODES:
            raise ConfigError(f"mock mode must be one of {MOCK_MODES}")
        if self.cache_upstream not in ("live", "mock"):
            raise ConfigError("cache_upstream must be 'live' or 'mock'")
        if self.embedding_upstream not in ("live", "hash"):
            raise ConfigError("embedding_upstream must be 'live' or 'hash'")
        needs_store = self.chat in ("cache", "replay") or self.embedding in ("cache", "replay")
        if needs_store and self.store_dir is None:
            raise ConfigError("cache/replay backends need backend.store_dir")


@dataclass(frozen=True)
class RunConfig:
    corpus_dir: Path
    split_file: Path
    out_dir: Path
    icl: IclConfig
    backend: BackendConfig = field(default_factory=BackendConfig)
    class_definitions: Path | None = None


def _parse_icl(raw: dict) -> IclConfig:
    try:
        strategy = SelectionStrategy(raw.get("strategy", "knn_title"))
    except ValueError:
        raise ConfigError(f"unknown strategy {raw.get('strategy')!r}") from None
    try:
        mode = PromptMode(raw.get("mode", "all_at_once"))
    except ValueError:
        raise ConfigError(f"unknown mode {raw.get('mode')!r}") from None
    prompt = PromptConfig(
        include_info=bool(raw.get("info", False)),
        include_essay=bool(raw.get("essay", False)),
        include_fts=bool(raw.get("fts", False)),
        mode=mode,
    )
    return IclConfig(
        strategy=strategy,
        k=int(raw.get("k", 5)),
        n_rounds=int(raw.get("n", 5)),
        prompt=prompt,
        run_seed=int(raw.get("run_seed", 0)),
        model_name=str(raw.get("model", "gpt-4")),
        temperature=float(raw.get("temperature", 0.0)),
        max_output_tokens=int(raw.get("max_output_tokens", 1024)),
    )


def load_run_config(path: Path | str) -> RunConfig:
    """Parse a YAML run config; relative paths resolve against the file."""
    config_path = Path(path)
    raw = yaml.safe_load(config_path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    base = config_path.parent

    def resolve(value: str | None) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else (base / p)

    for key in ("corpus_dir", "split_file", "out_dir"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")

    backend_raw = raw.get("backend", {}) or {}
    backend = BackendConfig(
        chat=str(backend_raw.get("chat", "mock")),
        mock_mode=str(backend_raw.get("mock_mode", "gold_echo")),
        mock_constant_label=str(
            backend_raw.get("mock_constant_label", Label.PREMISE.display_name)
        ),
        cache_upstream=str(backend_raw.get("cache_upstream", "live")),
        embedding=str(backend_raw.get("embedding", "hash")),
        embedding_upstream=str(backend_raw.get("embedding_upstream", "live")),
        embedding_model=str(backend_raw.get("embedding_model", "text-embedding-ada-002")),
        embedding_dim=int(backend_raw.get("embedding_dim", 8)),
        store_dir=resolve(backend_raw.get("store_dir")),
        base_url=str(backend_raw.get("base_url", "https://api.openai.com/v1")),
        api_key_env=str(backend_raw.get("api_key_env", "OPENAI_API_KEY")),
    )
    return RunConfig(
        corpus_dir=resolve(raw["corpus_dir"]),
        split_file=resolve(raw["split_file"]),
        out_dir=resolve(raw["out_dir"]),
        icl=_parse_icl(raw.get("icl", {}) or {}),
        backend=backend,
        class_definitions=resolve(raw.get("class_definitions")),
    )


def config_digest(icl: IclConfig) -> str:
    """Digest over the semantically meaningful experiment fields only."""
    payload = json.dumps(
        {
            "strategy": icl.strategy.value,
            "k": icl.k,
            "n_rounds": icl.n_rounds,
            "run_seed": icl.run_seed,
            "info": icl.prompt.include_info,
            "essay": icl.prompt.include_essay,
            "fts": icl.prompt.include_fts,
            "mode": icl.prompt.mode.value,
            "model": icl.model_name,
            "temperature": icl.temperature,
            "max_output_tokens": icl.max_output_tokens,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


_STRATEGY_SUFFIX = {
    SelectionStrategy.KNN_TITLE: "NN",
    SelectionStrategy.KNN_LEN: "NN^len",
    SelectionStrategy.KRN: "RN",
}


def run_label(icl: IclConfig) -> str:
    """Report row label in the published vocabulary, e.g. ``info + essay + 5NN + 5Ens``."""
    parts = []
    if icl.prompt.include_info:
        parts.append("info")
    if icl.prompt.include_essay:
        parts.append("essay")
    if icl.prompt.include_fts:
        parts.append("fts")
    if icl.k > 0:
        parts.append(f"{icl.k}{_STRATEGY_SUFFIX[icl.strategy]}")
        if icl.n_rounds > 1:
            parts.append(f"{icl.n_rounds}Ens")
    else:
        parts.append("no-demos")
    if icl.prompt.mode is PromptMode.ONE_BY_ONE:
        parts.append("one-by-one")
    return " + ".join(parts)
