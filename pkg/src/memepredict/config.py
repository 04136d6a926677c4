"""Run configuration: one TOML file plus command-line overrides."""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .features import DEFAULT_HORIZONS
from .sim import CorpusMix, NetworkSpec

LEXICON_FILES = {axis: f"lexicon_{axis}.tsv" for axis in ("happiness", "arousal", "dominance", "polarity")}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Thresholds:
    success_min: int = 1000
    failure_max: int = 100
    early_frac: float = 0.03
    avoid_threshold: int = 25
    alpha: float = 0.05

    def __post_init__(self):
        if not self.success_min > self.failure_max:
            raise ConfigError("success_min must exceed failure_max")
        if not 0.0 < self.early_frac < 1.0:
            raise ConfigError("early_frac must lie in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.avoid_threshold < 1:
            raise ConfigError("avoid_threshold must be >= 1")


@dataclass(frozen=True)
class ModelConfig:
    kind: str = "tree_ensemble"
    n_trees: int = 100
    max_depth: int | None = None
    k_folds: int = 10

    def __post_init__(self):
        if self.kind not in ("naive_bayes", "tree_ensemble"):
            raise ConfigError(f"unknown model kind {self.kind!r}")
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.k_folds < 2:
            raise ConfigError("k_folds must be >= 2")


@dataclass(frozen=True)
class Paths:
    """Artifact locations; empty strings resolve inside ``out_dir``."""

    out_dir: str = "run"
    graph: str = ""
    trajectories: str = ""
    texts: str = ""
    lexicon_dir: str = ""
    sensors: str = ""
    model: str = ""

    def resolve(self, name: str) -> Path:
        defaults = {"graph": "graph.tsv", "trajectories": "trajectories.jsonl", "texts": "texts.jsonl",
                    "lexicon_dir": ".", "sensors": "sensors.txt", "model": "model.json"}
        value = getattr(self, name)
        return Path(value) if value else Path(self.out_dir) / defaults[name]

    def out(self, filename: str) -> Path:
        return Path(self.out_dir) / filename

    def lexicon(self, axis: str) -> Path:
        return self.resolve("lexicon_dir") / LEXICON_FILES[axis]


@dataclass(frozen=True)
class RunConfig:
    paths: Paths = field(default_factory=Paths)
    horizons: tuple = DEFAULT_HORIZONS
    thresholds: Thresholds = field(default_factory=Thresholds)
    rng_seed: int = 0
    n_memes: int = 1000
    network: NetworkSpec = field(default_factory=NetworkSpec)
    corpus: CorpusMix = field(default_factory=CorpusMix)
    model: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self):
        h = tuple(float(x) for x in self.horizons)
        if not h or any(x <= 0 for x in h):
            raise ConfigError("horizons must be positive hours")
        object.__setattr__(self, "horizons", h)
        if self.n_memes < 1:
            raise ConfigError("n_memes must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["horizons"] = list(self.horizons)
        d["corpus"]["strategy_weights"] = [list(x) for x in self.corpus.strategy_weights]
        return d


def _section(cls, raw, name):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"[{name}] unknown key(s): {', '.join(unknown)}")
    if cls is CorpusMix and "strategy_weights" in raw:
        sw = raw["strategy_weights"]
        raw = dict(raw, strategy_weights=tuple((str(k), float(v)) for k, v in
                                               (sw.items() if isinstance(sw, dict) else sw)))
    try:
        return cls(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def from_mapping(doc: dict) -> RunConfig:
    top = {"paths", "horizons", "thresholds", "rng_seed", "n_memes", "network", "corpus", "model"}
    unknown = sorted(set(doc) - top)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    kw = {
        "paths": _section(Paths, doc.get("paths"), "paths"),
        "thresholds": _section(Thresholds, doc.get("thresholds"), "thresholds"),
        "network": _section(NetworkSpec, doc.get("network"), "network"),
        "corpus": _section(CorpusMix, doc.get("corpus"), "corpus"),
        "model": _section(ModelConfig, doc.get("model"), "model"),
    }
    for key in ("horizons", "rng_seed", "n_memes"):
        if key in doc:
            kw[key] = doc[key]
    return RunConfig(**kw)


def load_config(path=None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return from_mapping(doc)


def override(cfg: RunConfig, **changes) -> RunConfig:
    """Apply non-``None`` overrides; dotted keys like ``paths.out_dir`` reach into sections."""
    top, nested = {}, {}
    for key, value in changes.items():
        if value is None:
            continue
        if "." in key:
            sec, sub = key.split(".", 1)
            nested.setdefault(sec, {})[sub] = value
        else:
            top[key] = value
    try:
        for sec, vals in nested.items():
            top[sec] = replace(getattr(cfg, sec), **vals)
        return replace(cfg, **top)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
