"""Pipeline configuration: a single declarative JSON file plus CLI overrides.

Every constant with a conventional default (filtering thresholds, the 0.001
TF-IDF cutoff, estimation settings) lives here rather than in code paths, and
the fully resolved configuration is echoed into the estimation report.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .estimate import EstimationSettings

ENV_CONFIG_PATH = "COLLABDYN_CONFIG"

DEFAULT_EFFECTS = (
    {"kind": "density"},
    {"kind": "transitive_triads"},
    {"kind": "covariate_activity", "name": "combinatorial_potential"},
    {"kind": "covariate_activity", "name": "combinatorial_opportunity"},
    {"kind": "covariate_activity", "name": "modularity"},
    {"kind": "covariate_activity", "name": "global_clustering"},
    {"kind": "covariate_activity", "name": "knowledge_diversity"},
    {"kind": "covariate_activity", "name": "knowledge_uniqueness"},
    {"kind": "covariate_activity", "name": "org_type"},
    {"kind": "dyadic_covariate", "name": "organizational_proximity"},
    {"kind": "dyadic_covariate", "name": "cognitive_proximity"},
)


@dataclass
class PipelineConfig:
    corpus_path: str
    periods: list[tuple[int, int]]
    corpus_format: str | None = None  # inferred from the suffix when None
    min_patents: int = 2
    min_collaborations: int = 1
    tfidf_threshold: float = 0.001
    extractor: str = "builtin"  # or "external"
    phrases_path: str | None = None
    score_aggregation: str = "max"
    merge_word_order_variants: bool = True
    classify_unknown_org_types: bool = False
    cumulative_collab: bool = False
    diversity_definition: str = "count_distance"
    uniqueness_definition: str = "org_rarity"
    freeze_covariates_at_first_period: bool = False
    louvain_seed: int = 8
    effects: list[dict] = field(default_factory=lambda: [dict(e) for e in DEFAULT_EFFECTS])
    estimation: EstimationSettings = field(default_factory=EstimationSettings)
    workers: int | None = None  # None -> number of processor cores
    output_dir: str = "out"

    def __post_init__(self):
        if len(self.periods) < 2:
            raise ConfigError("config needs at least 2 period boundaries")
        self.periods = [(int(a), int(b)) for a, b in self.periods]
        if self.extractor not in ("builtin", "external"):
            raise ConfigError(f"unknown extractor '{self.extractor}'")
        if self.extractor == "external" and not self.phrases_path:
            raise ConfigError("external extractor needs 'phrases_path'")
        if self.tfidf_threshold < 0:
            raise ConfigError("tfidf_threshold must be >= 0")
        if not self.effects:
            raise ConfigError("the effect list is empty")

    @property
    def resolved_workers(self) -> int:
        return self.workers if self.workers else (os.cpu_count() or 1)

    def estimation_settings(self) -> EstimationSettings:
        return dataclasses.replace(self.estimation, workers=self.resolved_workers)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["periods"] = [list(p) for p in self.periods]
        d["estimation"] = dataclasses.asdict(self.estimation)
        d["resolved_workers"] = self.resolved_workers
        return d


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Read the JSON config file and apply CLI overrides."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    raw.update(overrides or {})

    estimation_raw = raw.pop("estimation", {})
    if not isinstance(estimation_raw, dict):
        raise ConfigError("'estimation' must be an object")
    seed_override = raw.pop("seed", None)
    if seed_override is not None:
        estimation_raw["seed"] = int(seed_override)

    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "corpus_path" not in raw:
        raise ConfigError("config needs 'corpus_path'")
    if "periods" not in raw:
        raise ConfigError("config needs 'periods'")

    try:
        estimation = EstimationSettings(**estimation_raw)
    except TypeError as exc:
        raise ConfigError(f"bad estimation settings: {exc}") from exc
    return PipelineConfig(estimation=estimation, **raw)
