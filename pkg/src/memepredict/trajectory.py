"""Meme trajectories, success labels and the JSONL corpus format."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .io import atomic_write

SUCCESS_MIN = 1000
FAILURE_MAX = 100


class MemeLabel(str, enum.Enum):
    SUCCESSFUL = "Successful"
    UNSUCCESSFUL = "Unsuccessful"
    EXCLUDED = "Excluded"


@dataclass(frozen=True, eq=False)
class MemeTrajectory:
    """Time-ordered post events for one meme.

    ``times`` are hours since the first post, so ``times[0] == 0``.
    ``meta`` carries generation parameters for synthetic memes and is not
    part of the JSONL record.
    """

    meme_id: str
    times: np.ndarray
    sources: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.shape[0] == 0:
            raise ValueError(f"meme {self.meme_id!r}: trajectory needs at least one event")
        if t.shape[0] != len(self.sources):
            raise ValueError(f"meme {self.meme_id!r}: times and sources differ in length")
        if np.any(np.diff(t) < 0):
            raise ValueError(f"meme {self.meme_id!r}: events are not sorted by time")
        if not np.all(np.isfinite(t)):
            raise ValueError(f"meme {self.meme_id!r}: non-finite event time")
        if t[0] != 0.0:
            t = t - t[0]
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sources", tuple(self.sources))

    @classmethod
    def from_events(cls, meme_id: str, events: Iterable[Sequence], meta=None):
        events = list(events)
        times = [float(t) for t, _ in events]
        sources = [str(s) for _, s in events]
        return cls(str(meme_id), np.asarray(times, dtype=np.float64), tuple(sources), dict(meta or {}))

    @property
    def events(self) -> list:
        return list(zip(self.times.tolist(), self.sources))

    @property
    def total_posts(self) -> int:
        return int(self.times.shape[0])

    @property
    def lifespan(self) -> float:
        return float(self.times[-1])

    def n_by(self, tau: float) -> int:
        """Number of events with ``t <= tau``."""
        return int(np.searchsorted(self.times, tau, side="right"))

    def sources_by(self, tau: float) -> tuple:
        return self.sources[: self.n_by(tau)]

    def to_record(self) -> dict:
        return {"meme_id": self.meme_id, "events": [[t, s] for t, s in self.events]}


def label(traj: MemeTrajectory, success_min: int = SUCCESS_MIN, failure_max: int = FAILURE_MAX) -> MemeLabel:
    if traj.total_posts >= success_min:
        return MemeLabel.SUCCESSFUL
    if traj.total_posts <= failure_max:
        return MemeLabel.UNSUCCESSFUL
    return MemeLabel.EXCLUDED


def time_to_n(traj: MemeTrajectory, n: int):
    """Hours until the ``n``-th post, or ``None`` if the meme never got ``n`` posts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if traj.total_posts < n:
        return None
    return float(traj.times[n - 1])


def timing_table(corpus: Iterable[MemeTrajectory], counts=(5, 10), success_min=SUCCESS_MIN,
                 failure_max=FAILURE_MAX) -> list:
    """Mean/median hours to reach ``counts`` posts and the final tally, per label class.

    Rows are ``(label, milestone, n_memes, mean_hours, median_hours)``; the
    milestone ``"total"`` is the time of the last post.
    """
    by_class = {MemeLabel.SUCCESSFUL: [], MemeLabel.UNSUCCESSFUL: []}
    for traj in corpus:
        lab = label(traj, success_min, failure_max)
        if lab in by_class:
            by_class[lab].append(traj)
    rows = []
    for lab, trajs in by_class.items():
        for milestone in list(counts) + ["total"]:
            if milestone == "total":
                vals = [t.lifespan for t in trajs]
            else:
                vals = [v for v in (time_to_n(t, milestone) for t in trajs) if v is not None]
            mean = float(np.mean(vals)) if vals else math.nan
            med = float(np.median(vals)) if vals else math.nan
            rows.append((lab.value, str(milestone), len(vals), mean, med))
    return rows


def dumps_jsonl(corpus: Iterable[MemeTrajectory]) -> str:
    return "".join(json.dumps(t.to_record(), separators=(",", ":")) + "\n" for t in corpus)


def write_jsonl(corpus: Iterable[MemeTrajectory], path) -> None:
    atomic_write(path, dumps_jsonl(corpus))


def read_jsonl(path) -> list:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(MemeTrajectory.from_events(rec["meme_id"], rec["events"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad trajectory record: {exc}") from exc
    return out
