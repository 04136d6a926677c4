"""Early-sensor blog discovery.

A blog is an early sensor when it posts inside the first ``early_frac`` of
successful memes' lifespans more often than a binomial null allows. Under
the null every poster on meme ``M`` is early with the same probability
``q_M = e_M / n_M`` (early posters over all posters). A blog's early count
is then Poisson-binomial over the memes it posted on; by default this is
approximated by a binomial with the mean ``q``.
"""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np
from scipy import stats

from .io import csv_text
from .trajectory import MemeTrajectory

log = logging.getLogger(__name__)

EARLY_FRAC = 0.03
ALPHA = 0.05
AVOID_THRESHOLD = 25
STRONG_FRAC = 0.25
EXACT_MAX_TRIALS = 64


def early_posters(corpus: Iterable[MemeTrajectory], early_frac: float = EARLY_FRAC) -> dict:
    """``meme_id -> set of sources`` posting at ``t <= early_frac * lifespan``."""
    if not 0.0 < early_frac <= 1.0:
        raise ValueError("early_frac must lie in (0, 1]")
    out = {}
    skipped = 0
    for traj in corpus:
        if traj.total_posts < 2 or traj.lifespan <= 0:
            skipped += 1
            continue
        out[traj.meme_id] = set(traj.sources_by(early_frac * traj.lifespan))
    if skipped:
        log.warning("skipped %d meme(s) with zero lifespan", skipped)
    return out


def poisson_binomial_sf(k: int, probs) -> float:
    """``P(X >= k)`` for a sum of independent Bernoulli(probs)."""
    probs = np.asarray(probs, dtype=np.float64)
    if k <= 0:
        return 1.0
    if k > probs.shape[0]:
        return 0.0
    pmf = np.zeros(probs.shape[0] + 1)
    pmf[0] = 1.0
    for j, p in enumerate(probs, 1):
        pmf[1:j + 1] = pmf[1:j + 1] * (1 - p) + pmf[:j] * p
        pmf[0] *= 1 - p
    return float(min(1.0, pmf[k:].sum()))


def binomial_sf(k: int, n: int, p: float) -> float:
    """``P(X >= k)`` for ``X ~ Binomial(n, p)``."""
    if k <= 0:
        return 1.0
    return float(stats.binom.sf(k - 1, n, p))


@dataclass(frozen=True)
class SensorRow:
    source_id: str
    n_memes_posted: int
    n_early: int
    p_value: float
    is_sensor: bool
    avoidance_p: float | None = None
    in_core_top_fraction: bool = False
    in_kmax_shell: bool = False


@dataclass(frozen=True)
class SensorReport:
    rows: tuple
    alpha: float
    n_memes: int
    early_frac: float
    meta: dict = field(default_factory=dict)

    def sensors(self) -> list:
        return [r.source_id for r in self.rows if r.is_sensor]

    def row(self, source_id) -> SensorRow:
        for r in self.rows:
            if r.source_id == source_id:
                return r
        raise KeyError(source_id)

    def to_csv(self) -> str:
        header = ("source_id", "n_memes_posted", "n_early", "p_value", "is_sensor",
                  "avoidance_p", "in_core_top_fraction", "in_kmax_shell")
        rows = [(r.source_id, r.n_memes_posted, r.n_early, r.p_value, r.is_sensor, r.avoidance_p,
                 r.in_core_top_fraction, r.in_kmax_shell) for r in self.rows]
        return csv_text(header, rows, comment=f"sensor report alpha={self.alpha} early_frac={self.early_frac}")

    def sensor_list(self) -> str:
        return "".join(f"{s}\n" for s in self.sensors())


def sensor_test(corpus, early_frac: float = EARLY_FRAC, alpha: float = ALPHA, *, exact: bool = False,
                bonferroni: bool = False, shells=None, core_fraction: float = 0.001) -> SensorReport:
    """Binomial early-posting test for every blog seen in ``corpus``.

    ``corpus`` should hold successful memes only. With ``exact=True`` blogs
    with at most 64 trials use the exact Poisson-binomial tail.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    corpus = list(corpus)
    early = early_posters(corpus, early_frac)
    if len(early) < 2:
        raise ValueError("sensor_test needs at least two successful memes with positive lifespan")

    posted = defaultdict(list)       # blog -> [(q_M, was_early)]
    for traj in corpus:
        if traj.meme_id not in early:
            continue
        posters = set(traj.sources)
        e = early[traj.meme_id]
        q = len(e) / len(posters)
        for b in posters:
            posted[b].append((q, b in e))

    qs = [len(early[t.meme_id]) / len(set(t.sources)) for t in corpus if t.meme_id in early]
    degenerate = all(q >= 1.0 for q in qs) or all(q <= 0.0 for q in qs)
    if degenerate:
        log.warning("degenerate corpus: every post is early or none is; all p-values set to 1")

    level = alpha / max(1, len(posted)) if bonferroni else alpha
    core_top = shells.top_fraction(core_fraction) if shells is not None else frozenset()
    kmax = shells.kmax_shell() if shells is not None else frozenset()
    rows = []
    for b in sorted(posted):
        trials = posted[b]
        k = len(trials)
        hits = sum(1 for _, e in trials if e)
        if degenerate or hits == 0:
            p = 1.0
        elif exact and k <= EXACT_MAX_TRIALS:
            p = poisson_binomial_sf(hits, [q for q, _ in trials])
        else:
            p = binomial_sf(hits, k, math.fsum(q for q, _ in trials) / k)
        rows.append(SensorRow(b, k, hits, p, p < level, None, b in core_top, b in kmax))
    return SensorReport(tuple(rows), alpha, len(early), early_frac,
                        meta={"bonferroni": bonferroni, "exact": exact, "level": level})


def avoidance_test(sensor_blogs, corpus_all, threshold_posts: int = AVOID_THRESHOLD) -> dict:
    """Lower-tail binomial p-value for each blog's mentions of small memes.

    A meme is small when it has fewer than ``threshold_posts`` posts. The
    null success probability is the corpus fraction of small memes; trials
    are the memes the blog mentions. Blogs with no mentions map to ``None``.
    """
    if threshold_posts < 1:
        raise ValueError("threshold_posts must be >= 1")
    corpus_all = list(corpus_all)
    if not corpus_all:
        raise ValueError("empty corpus")
    small = {t.meme_id for t in corpus_all if t.total_posts < threshold_posts}
    frac = len(small) / len(corpus_all)
    mentions = defaultdict(set)
    wanted = set(sensor_blogs)
    for t in corpus_all:
        for s in set(t.sources) & wanted:
            mentions[s].add(t.meme_id)
    out = {}
    for b in sorted(wanted):
        memes = mentions.get(b)
        if not memes:
            out[b] = None
            continue
        hits = len(memes & small)
        out[b] = float(stats.binom.cdf(hits, len(memes), frac))
    return out


def with_avoidance(report: SensorReport, corpus_all, threshold_posts: int = AVOID_THRESHOLD) -> SensorReport:
    """Copy of ``report`` with ``avoidance_p`` filled in for the flagged sensors."""
    av = avoidance_test(report.sensors(), corpus_all, threshold_posts)
    rows = tuple(replace(r, avoidance_p=av.get(r.source_id)) if r.is_sensor else r for r in report.rows)
    return replace(report, rows=rows)


def characterize(report: SensorReport, shells, core_fraction: float = 0.001,
                 strong_frac: float = STRONG_FRAC) -> dict:
    """Where the sensors sit in the k-shell structure.

    Returns fractions of sensors in the top ``core_fraction`` of vertices
    by shell index, of strong sensors (early on at least ``strong_frac`` of
    the memes) in the k_max-shell, and two baselines: the share of all
    posting blogs in the top core, and the share of strong sensors among
    the highest-degree vertices (as many as the k_max-shell holds).
    """
    sensors = report.sensors()
    if not sensors:
        raise ValueError("characterize needs at least one sensor")
    g = shells.graph
    core_top = shells.top_fraction(core_fraction)
    kmax = shells.kmax_shell()
    need = strong_frac * report.n_memes
    strong = [r.source_id for r in report.rows if r.is_sensor and r.n_early >= need]
    deg = g.degrees
    order = sorted(range(g.n), key=lambda i: (-int(deg[i]), g.ids[i]))
    top_degree = {g.ids[i] for i in order[: len(kmax)]}
    all_blogs = [r.source_id for r in report.rows]

    def frac(items, pool):
        return sum(1 for x in items if x in pool) / len(items) if items else math.nan

    return {
        "n_sensors": len(sensors),
        "n_strong": len(strong),
        "core_size": len(core_top),
        "kmax": shells.k_max,
        "kmax_shell_size": len(kmax),
        "sensor_core_fraction": frac(sensors, core_top),
        "strong_kmax_fraction": frac(strong, kmax),
        "strong_top_degree_fraction": frac(strong, top_degree),
        "all_blogs_core_fraction": frac(all_blogs, core_top),
        "sensor_kmax_fraction": frac(sensors, kmax),
    }
