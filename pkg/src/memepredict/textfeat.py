"""Lexicon scoring of the text around a meme.

Four axes are produced per meme: happiness, arousal and dominance (ANEW
style ratings) and polarity (positive/negative labels as +1/-1).
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .io import atomic_write

AXES = ("happiness", "arousal", "dominance", "polarity")
POLARITY_LABELS = {"positive": 1.0, "pos": 1.0, "+": 1.0, "negative": -1.0, "neg": -1.0, "-": -1.0}

_TOKEN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Lexicon:
    axis_name: str
    scores: Mapping[str, float]

    def __post_init__(self):
        if not self.scores:
            raise ValueError(f"lexicon {self.axis_name!r} is empty")
        for w in self.scores:
            if w != w.lower():
                raise ValueError(f"lexicon {self.axis_name!r}: word {w!r} is not lowercase")
        object.__setattr__(self, "scores", dict(self.scores))

    def __len__(self):
        return len(self.scores)

    @property
    def total(self) -> float:
        """``s^T 1``: sum of all lexicon scores."""
        return math.fsum(self.scores.values())


def load_lexicon(path, axis_name: str | None = None) -> Lexicon:
    """Read ``word<TAB>score`` lines; polarity labels may be words like ``positive``."""
    scores = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'word<TAB>score'")
            word, raw = parts[0].strip().lower(), parts[1].strip()
            if raw.lower() in POLARITY_LABELS:
                val = POLARITY_LABELS[raw.lower()]
            else:
                try:
                    val = float(raw)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad score {raw!r}") from None
            if word in scores:
                raise ValueError(f"{path}:{lineno}: duplicate word {word!r}")
            scores[word] = val
    return Lexicon(axis_name or str(path), scores)


def write_lexicon(lex: Lexicon, path) -> None:
    lines = [f"# schema_version=1 lexicon axis={lex.axis_name}"]
    lines.extend(f"{w}\t{lex.scores[w]!r}" for w in sorted(lex.scores))
    atomic_write(path, "\n".join(lines) + "\n")


def tokenize(text: str) -> Counter:
    """Bag of lowercase alphanumeric tokens; ``"don't"`` gives ``don`` and ``t``."""
    return Counter(_TOKEN.findall(text.lower()))


def score(doc: Mapping[str, int], lex: Lexicon, mode: str = "weighted_average"):
    """Aggregate lexicon score of a bag of words, or ``None`` when undefined.

    ``weighted_average`` is the mean score over lexicon-word tokens (with
    multiplicity). ``literal`` is ``s^T x / s^T 1`` where the denominator
    sums every lexicon score; it is undefined when that sum is zero.
    """
    hits = [(lex.scores[w], c) for w, c in doc.items() if w in lex.scores and c > 0]
    if not hits:
        return None
    num = math.fsum(s * c for s, c in hits)
    if mode == "weighted_average":
        # the exact mean lies within the hit scores; clamp away rounding error
        lo, hi = min(s for s, _ in hits), max(s for s, _ in hits)
        return min(max(num / sum(c for _, c in hits), lo), hi)
    if mode == "literal":
        denom = lex.total
        if denom == 0.0:
            return None
        return num / denom
    raise ValueError(f"unknown score mode {mode!r}")


def _as_axes(lexicons) -> list:
    if isinstance(lexicons, Mapping):
        return [lexicons[a] for a in AXES]
    lexicons = list(lexicons)
    if len(lexicons) != 4:
        raise ValueError("need four lexicons: happiness, arousal, dominance, polarity")
    return lexicons


def language_features(paragraphs: Sequence[str], lexicons, mode: str = "weighted_average") -> tuple:
    """Per-axis mean of paragraph scores, skipping paragraphs with no score.

    Returns ``(happiness, arousal, dominance, polarity)``; an axis with no
    scorable paragraph is 0.
    """
    if not paragraphs:
        raise ValueError("language_features needs at least one paragraph")
    lexs = _as_axes(lexicons)
    bags = [tokenize(p) for p in paragraphs]
    out = []
    for lex in lexs:
        vals = [v for v in (score(b, lex, mode) for b in bags) if v is not None]
        out.append(math.fsum(vals) / len(vals) if vals else 0.0)
    return tuple(out)
