import math
import re
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from memepredict.synthtext import synthesize_paragraphs, synthetic_lexicons
from memepredict.textfeat import AXES, Lexicon, language_features, load_lexicon, score, tokenize, write_lexicon
from memepredict.trajectory import MemeTrajectory


def test_tokenize_examples():
    assert tokenize("Happy, happy day!") == {"happy": 2, "day": 1}
    assert tokenize("") == {}
    assert tokenize("don't stop") == {"don": 1, "t": 1, "stop": 1}


def test_tokenize_underscore_splits():
    assert tokenize("a_b 9lives") == {"a": 1, "b": 1, "9lives": 1}


def test_weighted_average_example():
    lex = Lexicon("h", {"happy": 9.0, "sad": 1.0})
    assert score({"happy": 2, "sad": 1}, lex) == pytest.approx(19 / 3)


def test_literal_balanced_lexicon_absent():
    lex = Lexicon("p", {"good": 1.0, "bad": -1.0})
    assert score({"good": 3}, lex, "literal") is None
    assert score({"good": 3}, lex) == 1.0


def test_no_lexicon_words_absent():
    lex = Lexicon("h", {"happy": 9.0})
    assert score({"other": 4}, lex) is None
    assert score({"other": 4}, lex, "literal") is None
    assert language_features(["nothing here"], [lex] * 4) == (0.0, 0.0, 0.0, 0.0)


def test_literal_value():
    lex = Lexicon("h", {"a": 2.0, "b": 6.0})
    assert score({"a": 1, "b": 1}, lex, "literal") == 1.0
    assert score({"a": 2}, lex, "literal") == pytest.approx(0.5)


def test_unknown_mode():
    with pytest.raises(ValueError):
        score({"a": 1}, Lexicon("h", {"a": 1.0}), "median")


def test_language_features_mean_of_paragraphs():
    lex = Lexicon("h", {"four": 4.0, "six": 6.0})
    other = Lexicon("x", {"zzz": 1.0})
    out = language_features(["four four", "six", "none"], [lex, other, other, other])
    assert out == (5.0, 0.0, 0.0, 0.0)


def test_language_features_mapping_and_errors():
    lex = {a: Lexicon(a, {"w": float(i)}) for i, a in enumerate(AXES)}
    assert language_features(["w"], lex) == (0.0, 1.0, 2.0, 3.0)
    with pytest.raises(ValueError):
        language_features([], lex)
    with pytest.raises(ValueError):
        language_features(["w"], [lex["happiness"]])


def _flat_features(paragraphs, lexicons):
    """Re-derive the four features with plain string handling."""
    out = []
    for axis in AXES:
        table = lexicons[axis].scores
        per_para = []
        for p in paragraphs:
            toks = [t for t in re.split(r"[^0-9a-z]+", p.lower()) if t]
            vals = [table[t] for t in toks if t in table]
            if vals:
                per_para.append(sum(vals) / len(vals))
        out.append(sum(per_para) / len(per_para) if per_para else 0.0)
    return out


def test_synthetic_matches_flat_recomputation():
    lexicons = synthetic_lexicons(rng_seed=2)
    corpus = [MemeTrajectory.from_events(f"m{i}", [(0.0, "a")], {"transmit_prob": 0.05 + 0.01 * i})
              for i in range(8)]
    texts = synthesize_paragraphs(corpus, lexicons, rng_seed=2)
    for meme in corpus:
        paras = texts[meme.meme_id]
        assert len(paras) == 10
        got = language_features(paras, lexicons)
        for a, b in zip(got, _flat_features(paras, lexicons)):
            assert a == pytest.approx(b, abs=1e-12)


def test_synthetic_lexicon_ranges():
    lex = synthetic_lexicons()
    for axis in AXES[:3]:
        assert all(1.0 <= v <= 9.0 for v in lex[axis].scores.values())
    assert set(lex["polarity"].scores.values()) <= {-1.0, 1.0}


def test_lexicon_roundtrip(tmp_path):
    lex = Lexicon("arousal", {"calm": 2.5, "wild": 8.25})
    write_lexicon(lex, tmp_path / "l.tsv")
    back = load_lexicon(tmp_path / "l.tsv", "arousal")
    assert back.scores == lex.scores


def test_polarity_labels(tmp_path):
    p = tmp_path / "pol.tsv"
    p.write_text("# c\nGood\tpositive\nbad\tneg\n", encoding="utf-8")
    assert load_lexicon(p).scores == {"good": 1.0, "bad": -1.0}


@pytest.mark.parametrize("text,msg", [
    ("a\t1\na\t2\n", "duplicate"),
    ("a 1\n", "word<TAB>score"),
    ("a\tlots\n", "bad score"),
    ("# only comments\n", "empty"),
])
def test_lexicon_errors(tmp_path, text, msg):
    p = tmp_path / "bad.tsv"
    p.write_text(text, encoding="utf-8")
    with pytest.raises(ValueError, match=msg):
        load_lexicon(p)


def test_lexicon_rejects_uppercase():
    with pytest.raises(ValueError):
        Lexicon("x", {"Up": 1.0})


words = st.sampled_from(["alpha", "beta", "gamma", "delta", "eps", "zeta"])
lexicons = st.dictionaries(st.sampled_from(["alpha", "beta", "gamma", "delta"]),
                           st.floats(-9, 9, allow_nan=False), min_size=1)
bags = st.dictionaries(words, st.integers(1, 20), min_size=1)


@given(lexicons, bags)
@settings(max_examples=200)
def test_weighted_average_bounds_and_scaling(scores, bag):
    lex = Lexicon("x", scores)
    v = score(bag, lex)
    if v is None:
        assert not set(bag) & set(scores)
        return
    lo, hi = min(scores.values()), max(scores.values())
    assert lo - 1e-9 <= v <= hi + 1e-9
    assert score({w: 2 * c for w, c in bag.items()}, lex) == pytest.approx(v, abs=1e-12)


@given(lexicons, st.lists(words, min_size=1, max_size=30), st.randoms(use_true_random=False))
@settings(max_examples=100)
def test_word_order_invariance(scores, tokens, rnd):
    lex = Lexicon("x", scores)
    shuffled = tokens[:]
    rnd.shuffle(shuffled)
    assert score(tokenize(" ".join(tokens)), lex) == score(tokenize(" ".join(shuffled)), lex)


@given(lexicons, bags)
@settings(max_examples=200)
def test_literal_and_weighted_share_numerator(scores, bag):
    # literal * s^T 1 and weighted * (lexicon tokens) are both s^T x
    lex = Lexicon("x", scores)
    lit, avg = score(bag, lex, "literal"), score(bag, lex)
    if lit is None or avg is None:
        return
    n_tok = sum(c for w, c in bag.items() if w in scores)
    assert lit * lex.total == pytest.approx(avg * n_tok, rel=1e-9, abs=1e-9)


def test_full_lexicon_uniform_counts():
    lex = Lexicon("x", {"a": 1.0, "b": 3.0, "c": 8.0})
    doc = Counter({"a": 2, "b": 2, "c": 2})
    # the literal form returns the uniform count; the average returns the mean score
    assert score(doc, lex, "literal") == pytest.approx(2.0)
    assert score(doc, lex) == pytest.approx(4.0)
    assert math.isclose(score(doc, lex, "literal") * lex.total, score(doc, lex) * 6)
