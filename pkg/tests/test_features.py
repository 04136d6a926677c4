import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memepredict import features as ft
from memepredict import sim
from memepredict.community import detect_communities
from memepredict.graph import from_edges
from memepredict.kshell import k_shell_decompose
from memepredict.sim import NetworkSpec
from memepredict.trajectory import (MemeLabel, MemeTrajectory, label, read_jsonl, time_to_n, timing_table,
                                    write_jsonl)


def _traj(times, sources=None, mid="m"):
    sources = sources or [f"s{i}" for i in range(len(times))]
    return MemeTrajectory.from_events(mid, zip(times, sources))


def _sized(n):
    return _traj(np.arange(n, dtype=float))


EXAMPLE = _traj([0, 3, 5, 11, 20])


@pytest.fixture(scope="module")
def world():
    g = sim.generate_network(NetworkSpec(n_communities=8, community_size=50, p_intra=0.12, p_inter=1e-3,
                                         core_size=8, p_core=0.02, seed=6))
    corpus = sim.generate_corpus(60, g, rng_seed=6)
    part = detect_communities(g)
    shells = k_shell_decompose(g)
    sensors = frozenset(g.ids[::7])
    return g, corpus, part, shells, sensors


@pytest.mark.parametrize("n,expected", [(1000, MemeLabel.SUCCESSFUL), (100, MemeLabel.UNSUCCESSFUL),
                                        (500, MemeLabel.EXCLUDED), (101, MemeLabel.EXCLUDED),
                                        (999, MemeLabel.EXCLUDED), (1, MemeLabel.UNSUCCESSFUL)])
def test_label_thresholds(n, expected):
    assert label(_sized(n)) is expected


def test_n_posts_examples():
    assert ft.n_posts(EXAMPLE, 12) == 4
    assert ft.n_posts(_traj([0, 0, 1]), 0) == 2
    assert ft.n_posts(EXAMPLE, 100) == 5


def test_post_rate_examples():
    assert ft.post_rate(EXAMPLE, 12) == pytest.approx(1 / 6)
    assert ft.post_rate(_traj([0, 1, 30]), 20) == 0.0
    assert ft.post_rate(_traj([0, 0, 0]), 5) == 0.0
    with pytest.raises(ValueError, match="rate undefined at τ=0"):
        ft.post_rate(EXAMPLE, 0)


def test_negative_tau():
    with pytest.raises(ValueError):
        ft.n_posts(EXAMPLE, -1)


def test_community_dispersion():
    part = {"1": "A", "2": "A", "3": "B", "4": "B"}
    assert ft.community_dispersion(_traj([0, 1], ["1", "3"]), 5, part) == 2
    assert ft.community_dispersion(_traj([0, 1, 2], ["1", "2", "1"]), 5, part) == 1
    # unknown sources share one bucket
    assert ft.community_dispersion(_traj([0, 1, 2], ["x", "y", "1"]), 5, part) == 2


def test_k_core_blogs():
    shells = k_shell_decompose(from_edges([("a", "b"), ("b", "c"), ("c", "a"), ("c", "p")]))
    assert ft.k_core_blogs(_traj([0, 1], ["p", "zz"]), 5, shells) == 0
    assert ft.k_core_blogs(_traj([0, 1, 2], ["a", "a", "b"]), 5, shells) == 2


def test_k_core_blogs_planted_seeds():
    g = sim.generate_network(NetworkSpec(n_communities=5, community_size=40, p_intra=0.1, p_inter=1e-3,
                                         core_size=10, p_core=0.5, p_tri=0.0, seed=1))
    traj = sim.simulate_cascade(g, sim.CascadeSpec(transmit_prob=0.1, n_seeds=3, seed_strategy="core"))
    assert ft.k_core_blogs(traj, 0, k_shell_decompose(g)) == 3


def test_es_blogs():
    t = _traj([0, 1, 2, 3], ["a", "b", "a", "c"])
    assert ft.es_blogs(t, 10, set()) == 0
    assert ft.es_blogs(t, 10, {"a", "b", "c"}) == 3
    assert ft.es_blogs(t, 1.5, {"b", "c"}) == 1


def test_extract_composition(world):
    g, corpus, part, shells, sensors = world
    traj = corpus[0]
    fv = ft.extract(traj, 12, part, shells, sensors, (1, 2, 3, 4))
    assert fv.values() == [1.0, 2.0, 3.0, 4.0, ft.n_posts(traj, 12), ft.post_rate(traj, 12),
                           ft.community_dispersion(traj, 12, part), ft.k_core_blogs(traj, 12, shells),
                           ft.es_blogs(traj, 12, sensors)]
    assert fv.label is label(traj)
    assert ft.extract(traj, 12, part, shells, sensors, (1, 2, 3, 4)) == fv


def test_saturation():
    fv = ft.extract(EXAMPLE, 1000, {}, frozenset(), frozenset())
    assert fv.n_posts == EXAMPLE.total_posts
    assert fv.community_dispersion == 1


def _flat_scan(traj, tau, part, core, sensors):
    comms, cores, ess, n = set(), set(), set(), 0
    for t, s in traj.events:
        if t > tau:
            break
        n += 1
        comms.add(part.get(s, "?unknown"))
        if s in core:
            cores.add(s)
        if s in sensors:
            ess.add(s)
    return n, len(comms), len(cores), len(ess)


def test_corpus_matches_flat_scan(world):
    g, corpus, part, shells, sensors = world
    core = shells.kmax_shell()
    mapping = part.community
    fvs = ft.extract_corpus(corpus, ft.DEFAULT_HORIZONS, part, shells, sensors)
    assert sorted(fvs) == [12.0, 24.0, 48.0, 120.0]
    for tau, rows in fvs.items():
        assert len(rows) == len(corpus)
        for traj, fv in zip(corpus, rows):
            n, c, k, e = _flat_scan(traj, tau, mapping, core, sensors)
            assert (fv.n_posts, fv.community_dispersion, fv.k_core_blogs, fv.es_blogs) == (n, c, k, e)
            assert fv.community_dispersion <= min(fv.n_posts, part.n_communities)
            assert fv.k_core_blogs <= len(core)
        X, y, ids = ft.feature_matrix(rows)
        assert X.shape == (len(ids), 9) and np.isfinite(X).all()


def test_monotone_in_tau(world):
    g, corpus, part, shells, sensors = world
    taus = [0, 1, 4, 12, 24, 48, 120, 500]
    for traj in corpus:
        prev = None
        for tau in taus:
            cur = (ft.n_posts(traj, tau), ft.community_dispersion(traj, tau, part),
                   ft.k_core_blogs(traj, tau, shells), ft.es_blogs(traj, tau, sensors))
            if prev:
                assert all(a <= b for a, b in zip(prev, cur))
            prev = cur


times_st = st.lists(st.floats(0, 200, allow_nan=False), min_size=1, max_size=40).map(sorted)


@given(times_st, st.floats(0.01, 300, allow_nan=False))
@settings(max_examples=300)
def test_post_rate_identity(times, tau):
    traj = _traj(times)
    lhs = ft.post_rate(traj, tau) * (tau / 2) + ft.n_posts(traj, tau / 2)
    rhs = ft.n_posts(traj, tau)
    assert abs(lhs - rhs) <= math.ulp(rhs)


def test_feature_matrix_drops_excluded():
    rows = [ft.extract(_sized(n), 5, {}, frozenset()) for n in (1000, 500, 10)]
    X, y, ids = ft.feature_matrix(rows)
    assert y.tolist() == [1, 0] and X.shape == (2, 9)
    with pytest.raises(ValueError):
        ft.feature_matrix(rows, drop_excluded=False)


def test_time_to_n():
    t = _traj([0, 3, 5])
    assert time_to_n(t, 2) == 3.0
    assert time_to_n(t, 4) is None
    with pytest.raises(ValueError):
        time_to_n(t, 0)


def test_timing_table():
    corpus = [_sized(1000), _traj(np.arange(1000) * 2.0, mid="b"), _traj([0, 1, 2, 3, 4, 40])]
    rows = {(r[0], r[1]): r[2:] for r in timing_table(corpus)}
    assert rows[("Successful", "5")] == (2, 6.0, 6.0)
    assert rows[("Successful", "total")] == (2, 1498.5, 1498.5)
    assert rows[("Unsuccessful", "5")] == (1, 4.0, 4.0)
    n, mean, med = rows[("Unsuccessful", "10")]
    assert n == 0 and math.isnan(mean)


def test_csv_roundtrip(world, tmp_path):
    g, corpus, part, shells, sensors = world
    rows = ft.extract_corpus(corpus[:10], [24], part, shells, sensors, {corpus[0].meme_id: (0.1, 0.2, 0.3, -1)})[24.0]
    path = tmp_path / "f.csv"
    path.write_text(ft.features_csv(rows), encoding="utf-8")
    assert ft.read_features_csv(path) == rows
    assert path.read_text().startswith("# schema_version=1")


def test_csv_bad_header(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError, match="columns"):
        ft.read_features_csv(p)


def test_jsonl_roundtrip(world, tmp_path):
    corpus = world[1][:10]
    write_jsonl(corpus, tmp_path / "t.jsonl")
    back = read_jsonl(tmp_path / "t.jsonl")
    assert [t.events for t in back] == [t.events for t in corpus]


def test_jsonl_errors(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"meme_id": "a", "events": [[0, "x"]]}\n{"meme_id": "b"}\n', encoding="utf-8")
    with pytest.raises(ValueError, match=":2:"):
        read_jsonl(p)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        _traj([])
    with pytest.raises(ValueError):
        _traj([0, 2, 1])
    t = _traj([5, 6, 9])
    assert t.times.tolist() == [0.0, 1.0, 4.0] and t.lifespan == 4.0
