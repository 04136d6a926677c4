"""Synthetic lexicons and meme-surrounding paragraphs for simulated corpora.

Each meme gets a latent tone tied weakly to its transmission probability;
lexicon words are drawn with weights tilted by that tone, so the language
features carry a small amount of signal and nothing more.
"""
from __future__ import annotations

import numpy as np

from .textfeat import AXES, Lexicon

_SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "pa", "do", "gu")


def _vocabulary(size: int) -> list:
    words = []
    n = len(_SYLLABLES)
    for i in range(size):
        a, b, c = i % n, (i // n) % n, (i // (n * n)) % n
        words.append(_SYLLABLES[a] + _SYLLABLES[b] + _SYLLABLES[c] + str(i // n ** 3 or ""))
    return words


def synthetic_lexicons(vocab_size: int = 600, n_rated: int = 250, n_polar: int = 200, rng_seed: int = 0) -> dict:
    """Four lexicons over a shared pseudo-word vocabulary.

    Ratings are on the 1..9 scale; polarity words are +1/-1.
    """
    rng = np.random.default_rng(np.random.SeedSequence([rng_seed, 0x1E4]))
    vocab = _vocabulary(vocab_size)
    rated = rng.choice(vocab_size, n_rated, replace=False)
    polar = rng.choice(vocab_size, n_polar, replace=False)
    lex = {}
    for axis in AXES[:3]:
        vals = np.round(rng.uniform(1.0, 9.0, n_rated), 2)
        lex[axis] = Lexicon(axis, {vocab[i]: float(v) for i, v in zip(rated, vals)})
    signs = np.where(rng.random(n_polar) < 0.5, -1.0, 1.0)
    lex["polarity"] = Lexicon("polarity", {vocab[i]: float(v) for i, v in zip(polar, signs)})
    return lex


def synthesize_paragraphs(corpus, lexicons: dict, rng_seed: int = 0, n_paragraphs: int = 10,
                          words_per_paragraph: int = 30, signal: float = 0.3) -> dict:
    """``meme_id -> list of paragraphs`` for a simulated corpus.

    The tone of meme ``m`` is ``signal * z_m + noise`` where ``z_m`` is its
    standardised log transmission probability (0 if unknown).
    """
    vocab = sorted(set().union(*(lex.scores for lex in lexicons.values())) | set(_vocabulary(600)))
    idx = {w: i for i, w in enumerate(vocab)}
    valence = np.zeros(len(vocab))
    for axis in AXES:
        for w, s in lexicons[axis].scores.items():
            valence[idx[w]] += (s - 5.0) / 4.0 if axis != "polarity" else s
    logp = np.array([np.log(t.meta.get("transmit_prob", np.nan)) for t in corpus], dtype=float)
    ok = np.isfinite(logp)
    z = np.zeros(len(corpus))
    if ok.sum() > 1 and logp[ok].std() > 0:
        z[ok] = (logp[ok] - logp[ok].mean()) / logp[ok].std()
    out = {}
    for k, traj in enumerate(corpus):
        rng = np.random.default_rng(np.random.SeedSequence([rng_seed, 0x7E47, k]))
        tone = signal * z[k] + rng.normal(0.0, 1.0)
        w = np.exp(0.5 * tone * valence)
        w /= w.sum()
        paras = []
        for _ in range(n_paragraphs):
            picks = rng.choice(len(vocab), words_per_paragraph, p=w)
            paras.append(" ".join(vocab[i] for i in picks).capitalize() + ".")
        out[traj.meme_id] = paras
    return out
