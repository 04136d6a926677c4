import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from memepredict import sensors as sn
from memepredict.graph import from_edges
from memepredict.kshell import k_shell_decompose
from memepredict.trajectory import MemeTrajectory
from oracles import null_corpus


def _meme(mid, events):
    return MemeTrajectory.from_events(mid, events)


def _fixed_q_corpus(n_memes=20, n_posters=20, star="B"):
    """``star`` is the only early poster on every meme, so q_M = 1/n_posters."""
    corpus = []
    for m in range(n_memes):
        others = [(50.0 + 50.0 * i / (n_posters - 2), f"o{m}_{i}") for i in range(n_posters - 1)]
        corpus.append(_meme(f"m{m}", [(0.0, star)] + others))
    return corpus


def test_early_posters_examples():
    corpus = [_meme("m", [(0, "a"), (50, "b"), (100, "c")]), _meme("n", [(0, "x"), (10, "y")])]
    assert sn.early_posters(corpus, 0.03) == {"m": {"a"}, "n": {"x"}}
    assert sn.early_posters(corpus, 1.0) == {"m": {"a", "b", "c"}, "n": {"x", "y"}}


def test_early_posters_skips_single_events(caplog):
    with caplog.at_level(logging.WARNING):
        out = sn.early_posters([_meme("solo", [(0, "a")]), _meme("m", [(0, "a"), (1, "b")])])
    assert list(out) == ["m"]
    assert "skipped 1" in caplog.text


@pytest.mark.parametrize("frac", [0.0, -0.1, 1.5])
def test_early_frac_range(frac):
    with pytest.raises(ValueError):
        sn.early_posters([], frac)


def test_early_posters_alternative_fraction_flat_scan():
    corpus = null_corpus(np.random.default_rng(3), n_blogs=30, n_memes=20)
    out = sn.early_posters(corpus, 0.05)
    for t in corpus:
        cut = 0.05 * (t.times[-1] - t.times[0])
        assert out[t.meme_id] == {s for tt, s in t.events if tt <= cut}


def test_extreme_blog_p_value():
    report = sn.sensor_test(_fixed_q_corpus())
    row = report.row("B")
    assert (row.n_memes_posted, row.n_early) == (20, 20)
    assert row.p_value == pytest.approx(0.05 ** 20, rel=1e-9)
    assert row.is_sensor
    # everyone else posted once and was late
    others = [r for r in report.rows if r.source_id != "B"]
    assert all(r.p_value == 1.0 and not r.is_sensor for r in others)


def test_zero_early_is_one():
    report = sn.sensor_test(_fixed_q_corpus())
    assert report.row("o0_3").p_value == 1.0


def test_needs_two_memes():
    with pytest.raises(ValueError):
        sn.sensor_test(_fixed_q_corpus(n_memes=1))
    with pytest.raises(ValueError):
        sn.sensor_test(_fixed_q_corpus(), alpha=1.0)


def test_degenerate_corpus_warns(caplog):
    corpus = [_meme(f"m{i}", [(0, "a"), (1, "b")]) for i in range(3)]
    with caplog.at_level(logging.WARNING):
        report = sn.sensor_test(corpus, early_frac=1.0)
    assert all(r.p_value == 1.0 for r in report.rows)
    assert "degenerate" in caplog.text


@given(st.integers(1, 60), st.floats(0.01, 0.99))
@settings(max_examples=200)
def test_binomial_tail_monotone(n, p):
    tails = [sn.binomial_sf(k, n, p) for k in range(n + 2)]
    assert tails[0] == 1.0 and tails[-1] == 0.0
    assert all(0.0 <= a <= 1.0 for a in tails)
    assert all(a >= b for a, b in zip(tails, tails[1:]))


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=25), st.integers(0, 26))
@settings(max_examples=200)
def test_poisson_binomial_matches_enumeration(probs, k):
    # brute force via convolution of two-point distributions
    dist = {0: 1.0}
    for p in probs:
        nxt = {}
        for s, w in dist.items():
            nxt[s] = nxt.get(s, 0.0) + w * (1 - p)
            nxt[s + 1] = nxt.get(s + 1, 0.0) + w * p
        dist = nxt
    expected = sum(w for s, w in dist.items() if s >= k)
    assert sn.poisson_binomial_sf(k, probs) == pytest.approx(min(1.0, expected), abs=1e-12)


def test_poisson_binomial_equal_probs_is_binomial():
    assert sn.poisson_binomial_sf(4, [0.2] * 12) == pytest.approx(stats.binom.sf(3, 12, 0.2), rel=1e-12)


def test_exact_and_approx_agree_on_constant_q():
    corpus = _fixed_q_corpus()
    a = sn.sensor_test(corpus).row("B").p_value
    b = sn.sensor_test(corpus, exact=True).row("B").p_value
    assert a == pytest.approx(b, rel=1e-9)


def test_ordering_invariance():
    rng = np.random.default_rng(5)
    corpus = null_corpus(rng, n_blogs=40, n_memes=30)
    base = sn.sensor_test(corpus)
    perm = [corpus[i] for i in rng.permutation(len(corpus))]
    assert sn.sensor_test(perm).rows == base.rows
    assert sn.sensor_test(corpus[::-1]).rows == base.rows


def test_bonferroni_is_stricter():
    rng = np.random.default_rng(8)
    corpus = null_corpus(rng, n_blogs=60, n_memes=80)
    plain = set(sn.sensor_test(corpus).sensors())
    strict = sn.sensor_test(corpus, bonferroni=True)
    assert set(strict.sensors()) <= plain
    assert strict.meta["level"] == pytest.approx(0.05 / len(strict.rows))


def _plant(corpus, stars, rng, span=100.0):
    """Force ``stars`` to post early on every meme."""
    out = []
    for t in corpus:
        ev = [(tt, s) for tt, s in t.events if s not in stars]
        ev += [(float(rng.uniform(0, 0.02 * span)), s) for s in stars]
        ev.append((span, "tail"))
        out.append(_meme(t.meme_id, sorted(ev)))
    return out


def test_planted_sensors_flagged():
    rng = np.random.default_rng(12)
    stars = {"b000", "b001", "b002", "b003", "b004"}
    corpus = _plant(null_corpus(rng, n_blogs=60, n_memes=60), stars, rng)
    report = sn.sensor_test(corpus)
    flagged = set(report.sensors())
    assert stars <= flagged
    others = [r for r in report.rows if r.source_id not in stars | {"tail"}]
    assert sum(r.is_sensor for r in others) / len(others) < 0.2


def test_null_flag_rate_is_moderate():
    rng = np.random.default_rng(0)
    rates = []
    for _ in range(10):
        report = sn.sensor_test(null_corpus(rng))
        rates.append(np.mean([r.is_sensor for r in report.rows]))
    assert 0.01 <= np.mean(rates) <= 0.08


def _avoid_corpus(n_small_hit):
    corpus = []
    for i in range(30):
        corpus.append(_meme(f"big{i}", [(float(j), f"x{j}") for j in range(30)] + [(31.0, "B")]))
    for i in range(30):
        posters = [(float(j), f"y{j}") for j in range(5)]
        if i < n_small_hit:
            posters.append((6.0, "B"))
        corpus.append(_meme(f"small{i}", posters))
    return corpus


def test_avoidance_never_small():
    out = sn.avoidance_test(["B"], _avoid_corpus(0))
    assert out["B"] == pytest.approx(0.5 ** 30, rel=1e-9)


def test_avoidance_matching_fraction():
    corpus = _avoid_corpus(30)
    # 60 mentions, 30 of them small, corpus fraction 0.5
    p = sn.avoidance_test(["B"], corpus)["B"]
    assert p == pytest.approx(stats.binom.cdf(30, 60, 0.5))
    assert abs(p - 0.5) < 0.06


def test_avoidance_absent_and_errors():
    assert sn.avoidance_test(["nobody"], _avoid_corpus(0)) == {"nobody": None}
    with pytest.raises(ValueError):
        sn.avoidance_test(["B"], _avoid_corpus(0), threshold_posts=0)


def test_with_avoidance_only_sensors():
    corpus = _fixed_q_corpus()
    report = sn.with_avoidance(sn.sensor_test(corpus), corpus)
    assert report.row("B").avoidance_p is not None
    assert report.row("o0_1").avoidance_p is None


def _report(rows, n_memes=4):
    return sn.SensorReport(tuple(sn.SensorRow(s, 4, e, 0.01 if sens else 0.9, sens) for s, e, sens in rows),
                           0.05, n_memes, 0.03)


def _k4_pendant():
    k4 = [(a, b) for i, a in enumerate("abcd") for b in "abcd"[i + 1:]]
    return k_shell_decompose(from_edges(k4 + [("d", "p"), ("p", "q")]))


def test_characterize_all_in_core():
    shells = _k4_pendant()
    out = sn.characterize(_report([("a", 4, True), ("b", 4, True), ("q", 0, False)]), shells, core_fraction=0.5)
    assert out["sensor_kmax_fraction"] == 1.0
    assert out["sensor_core_fraction"] == 1.0
    assert out["strong_kmax_fraction"] == 1.0
    assert out["all_blogs_core_fraction"] == pytest.approx(2 / 3)


def test_characterize_disjoint():
    out = sn.characterize(_report([("p", 1, True), ("q", 2, True)]), _k4_pendant(), core_fraction=0.5)
    assert out["sensor_kmax_fraction"] == 0.0 and out["sensor_core_fraction"] == 0.0
    assert out["n_strong"] == 2 and out["strong_kmax_fraction"] == 0.0


def test_characterize_no_strong_is_nan():
    out = sn.characterize(_report([("a", 0, True)]), _k4_pendant())
    assert out["n_strong"] == 0 and math.isnan(out["strong_kmax_fraction"])


def test_characterize_needs_sensors():
    with pytest.raises(ValueError):
        sn.characterize(_report([("a", 0, False)]), _k4_pendant())


def test_report_outputs():
    report = sn.sensor_test(_fixed_q_corpus())
    text = report.to_csv()
    assert text.startswith("# schema_version=1")
    assert text.splitlines()[1].startswith("source_id,n_memes_posted,n_early,p_value,is_sensor")
    assert report.sensor_list() == "B\n"
    for r in report.rows:
        assert r.n_early <= r.n_memes_posted and 0.0 <= r.p_value <= 1.0
        assert r.is_sensor == (r.p_value < report.alpha)
