"""Per-meme feature vectors at an observation horizon.

All horizons are hours since the meme's first post. Cumulative features
count events with ``t <= tau``.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Iterable, Mapping

import numpy as np

from .io import csv_text, read_csv
from .trajectory import FAILURE_MAX, SUCCESS_MIN, MemeLabel, MemeTrajectory, label

DEFAULT_HORIZONS = (12.0, 24.0, 48.0, 120.0)
LANGUAGE_FEATURES = ("happiness", "arousal", "dominance", "polarity")
VOLUME_FEATURES = ("n_posts", "post_rate")
NETWORK_FEATURES = ("community_dispersion", "k_core_blogs", "es_blogs")
FEATURE_NAMES = LANGUAGE_FEATURES + VOLUME_FEATURES + NETWORK_FEATURES
CSV_COLUMNS = ("meme_id", "tau_hours") + FEATURE_NAMES + ("label",)

_UNKNOWN = object()  # community bucket for sources missing from the partition


def n_posts(traj: MemeTrajectory, tau: float) -> int:
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return traj.n_by(tau)


def post_rate(traj: MemeTrajectory, tau: float) -> float:
    """``(#posts(tau) - #posts(tau/2)) / (tau/2)`` in posts per hour."""
    if tau <= 0:
        raise ValueError("rate undefined at τ=0")
    half = tau / 2.0
    return (traj.n_by(tau) - traj.n_by(half)) / half


def community_dispersion(traj: MemeTrajectory, tau: float, partition) -> int:
    """Distinct communities touched by ``tau``; unknown sources share one bucket."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    seen = set()
    for src in traj.sources_by(tau):
        c = partition.get(src)
        seen.add(_UNKNOWN if c is None else c)
    return len(seen)


def k_core_blogs(traj: MemeTrajectory, tau: float, shells) -> int:
    """Distinct sources in the k_max-shell that posted by ``tau``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    core = shells.kmax_shell() if hasattr(shells, "kmax_shell") else shells
    return len(set(traj.sources_by(tau)) & core)


def es_blogs(traj: MemeTrajectory, tau: float, sensors) -> int:
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return len(set(traj.sources_by(tau)) & set(sensors))


@dataclass(frozen=True)
class FeatureVector:
    meme_id: str
    tau_hours: float
    happiness: float
    arousal: float
    dominance: float
    polarity: float
    n_posts: int
    post_rate: float
    community_dispersion: int
    k_core_blogs: int
    es_blogs: int
    label: MemeLabel

    def values(self) -> list:
        return [float(getattr(self, f)) for f in FEATURE_NAMES]

    def row(self) -> tuple:
        t = astuple(self)
        return t[:-1] + (self.label.value,)


def extract(traj: MemeTrajectory, tau: float, partition, shells, sensors=frozenset(),
            language=(0.0, 0.0, 0.0, 0.0), success_min=SUCCESS_MIN, failure_max=FAILURE_MAX) -> FeatureVector:
    """Assemble the nine features and the label for one meme at horizon ``tau``."""
    core = shells.kmax_shell() if hasattr(shells, "kmax_shell") else frozenset(shells)
    sensors = frozenset(sensors)
    happiness, arousal, dominance, polarity = (float(x) for x in language)
    return FeatureVector(
        meme_id=traj.meme_id,
        tau_hours=float(tau),
        happiness=happiness,
        arousal=arousal,
        dominance=dominance,
        polarity=polarity,
        n_posts=n_posts(traj, tau),
        post_rate=post_rate(traj, tau),
        community_dispersion=community_dispersion(traj, tau, partition),
        k_core_blogs=k_core_blogs(traj, tau, core),
        es_blogs=es_blogs(traj, tau, sensors),
        label=label(traj, success_min, failure_max),
    )


def extract_corpus(corpus: Iterable[MemeTrajectory], horizons, partition, shells, sensors=frozenset(),
                   language: Mapping[str, tuple] | None = None, **label_kw) -> dict:
    """``tau -> [FeatureVector, ...]`` for every meme, in corpus order.

    ``language`` maps meme id to its four language features; missing memes
    get zeros.
    """
    core = shells.kmax_shell() if hasattr(shells, "kmax_shell") else frozenset(shells)
    sensors = frozenset(sensors)
    language = language or {}
    corpus = list(corpus)
    out = {}
    for tau in horizons:
        out[float(tau)] = [
            extract(t, tau, partition, core, sensors, language.get(t.meme_id, (0.0,) * 4), **label_kw)
            for t in corpus
        ]
    return out


def feature_matrix(vectors: Iterable[FeatureVector], drop_excluded: bool = True):
    """``(X, y, meme_ids)`` with ``y = 1`` for Successful; Excluded rows dropped."""
    rows, ys, ids = [], [], []
    for fv in vectors:
        if fv.label is MemeLabel.EXCLUDED:
            if drop_excluded:
                continue
            raise ValueError(f"meme {fv.meme_id!r} has an Excluded label")
        rows.append(fv.values())
        ys.append(1 if fv.label is MemeLabel.SUCCESSFUL else 0)
        ids.append(fv.meme_id)
    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(FEATURE_NAMES))
    return X, np.asarray(ys, dtype=np.int64), ids


def features_csv(vectors: Iterable[FeatureVector]) -> str:
    return csv_text(CSV_COLUMNS, (fv.row() for fv in vectors), comment="meme features")


def read_features_csv(path) -> list:
    header, rows = read_csv(path)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected feature columns {header}")
    out = []
    kinds = {f.name: f.type for f in fields(FeatureVector)}
    for r in rows:
        vals = dict(zip(header, r))
        kw = {}
        for name in CSV_COLUMNS:
            raw = vals[name]
            if name == "meme_id":
                kw[name] = raw
            elif name == "label":
                kw[name] = MemeLabel(raw)
            elif kinds[name] in ("int", int):
                kw[name] = int(raw)
            else:
                kw[name] = float(raw)
        out.append(FeatureVector(**kw))
    return out
