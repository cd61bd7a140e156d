"""Run configuration: one structured config file, flag overrides win.

All randomness in a run flows from the single root seed through named
sub-streams, so adding a stage never perturbs another stage's draws.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from valuelens.errors import ConfigError


@dataclass
class GeoConfig:
    regions: Optional[str] = None
    survey_values: Optional[str] = None
    state_metrics: Optional[str] = None
    election: Optional[str] = None
    posts_cap: int = 2000
    comments_cap: int = 2000
    min_total: int = 250
    translation_cache: Optional[str] = None
    region_aliases: dict[str, str] = field(default_factory=dict)


@dataclass
class EvalConfig:
    relevance_annotations: Optional[str] = None
    stance_annotations: Optional[str] = None


@dataclass
class RunConfig:
    seed: int
    out_dir: str
    threads: int = 1
    gate: float = 0.5
    stance_display_threshold: float = 0.2
    scorer: str = "lexicon"  # "lexicon" or "remote:<URL>"
    lexicon_path: Optional[str] = None
    char_cap: int = 4000
    remote_batch_size: int = 64
    downsample_cap: int = 1000
    language: Optional[str] = "en"
    dump_paths: list[str] = field(default_factory=list)
    meta_path: Optional[str] = None
    corpus_dir: Optional[str] = None
    scored_path: Optional[str] = None
    profiles_path: Optional[str] = None
    user_sets_path: Optional[str] = None
    embeddings_path: Optional[str] = None
    n_random_pairs: int = 100_000
    top_n: int = 20
    radar_communities: list[str] = field(default_factory=list)
    nn_targets: list[str] = field(default_factory=list)
    nn_top_k: int = 10
    eval: EvalConfig = field(default_factory=EvalConfig)
    geo: GeoConfig = field(default_factory=GeoConfig)

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int):
            raise ConfigError("seed is mandatory and must be an integer")
        if not self.out_dir:
            raise ConfigError("out_dir is mandatory")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 0.0 <= self.gate <= 1.0:
            raise ConfigError("gate must be in [0,1]")
        if not 0.0 <= self.stance_display_threshold <= 1.0:
            raise ConfigError("stance_display_threshold must be in [0,1]")
        if self.downsample_cap < 1:
            raise ConfigError("downsample_cap must be >= 1")
        if self.char_cap < 1:
            raise ConfigError("char_cap must be >= 1")
        if self.remote_batch_size < 1:
            raise ConfigError("remote_batch_size must be >= 1")
        if self.n_random_pairs < 2:
            raise ConfigError("n_random_pairs must be >= 2")
        if self.top_n < 1:
            raise ConfigError("top_n must be >= 1")
        if self.nn_top_k < 1:
            raise ConfigError("nn_top_k must be >= 1")
        if self.scorer != "lexicon" and not self.scorer.startswith("remote:"):
            raise ConfigError("scorer must be 'lexicon' or 'remote:<URL>'")
        for cap_name in ("posts_cap", "comments_cap", "min_total"):
            if getattr(self.geo, cap_name) < 1:
                raise ConfigError(f"geo.{cap_name} must be >= 1")

    # resolved paths
    @property
    def out(self) -> Path:
        return Path(self.out_dir)

    def resolved_corpus_dir(self) -> Path:
        return Path(self.corpus_dir) if self.corpus_dir else self.out / "corpus"

    def resolved_scored_path(self) -> Path:
        return Path(self.scored_path) if self.scored_path else self.out / "scored.jsonl"

    def resolved_profiles_path(self) -> Path:
        return Path(self.profiles_path) if self.profiles_path else self.out / "profiles.jsonl"

    def resolved_user_sets_path(self) -> Path:
        return Path(self.user_sets_path) if self.user_sets_path else self.out / "user_sets.jsonl"

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_LIST_STR_FIELDS = {"dump_paths", "radar_communities", "nn_targets"}


def _build(cls, raw: Mapping[str, Any], context: str):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown {context} keys: {sorted(unknown)}")
    return raw


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """Load a JSON config file and apply flag overrides (flags win)."""
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    _build(RunConfig, raw, "config")
    sub_eval = raw.pop("eval", {})
    sub_geo = raw.pop("geo", {})
    if not isinstance(sub_eval, dict) or not isinstance(sub_geo, dict):
        raise ConfigError("'eval' and 'geo' config sections must be objects")
    _build(EvalConfig, sub_eval, "eval")
    _build(GeoConfig, sub_geo, "geo")

    if "seed" not in raw:
        raise ConfigError("seed is mandatory (config file or --seed)")
    if "out_dir" not in raw:
        raise ConfigError("out_dir is mandatory (config file or --out)")
    for name in _LIST_STR_FIELDS:
        if name in raw and not isinstance(raw[name], list):
            raise ConfigError(f"{name} must be a list")
    try:
        return RunConfig(
            **{**raw, "eval": EvalConfig(**sub_eval), "geo": GeoConfig(**sub_geo)}
        )
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from exc
