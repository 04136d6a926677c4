"""Synthetic community/core-periphery networks and cascade simulation.

Networks are planted partitions with a dense core overlay and a light
triangle-closing pass, which together give community structure, a
core-periphery split, right-skewed degrees and elevated transitivity.
Cascades follow a discrete-time independent-cascade process.
"""
from __future__ import annotations

import enum
import weakref
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Graph, from_index_edges
from .trajectory import MemeTrajectory


class SeedStrategy(str, enum.Enum):
    DISPERSED = "dispersed_communities"
    CONCENTRATED = "concentrated_community"
    CORE = "core"
    PERIPHERY = "periphery"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class NetworkSpec:
    n_communities: int = 40
    community_size: int = 200
    p_intra: float = 0.05
    p_inter: float = 5e-6
    core_size: int = 20
    p_core: float = 0.002
    p_tri: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_communities < 1:
            raise ValueError("n_communities must be >= 1")
        if self.community_size < 2:
            raise ValueError("community_size must be >= 2")
        for name in ("p_intra", "p_inter", "p_core", "p_tri"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be a probability, got {p}")
        if not self.p_inter < self.p_intra:
            raise ValueError("community structure needs p_inter < p_intra")
        if not 0 <= self.core_size <= self.n_vertices:
            raise ValueError("core_size must lie in [0, n_communities * community_size]")

    @property
    def n_vertices(self) -> int:
        return self.n_communities * self.community_size


@dataclass(frozen=True)
class CascadeSpec:
    transmit_prob: float
    n_seeds: int = 1
    seed_strategy: SeedStrategy = SeedStrategy.UNIFORM
    dt_hours: float = 4.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.transmit_prob <= 1.0:
            raise ValueError("transmit_prob must be a probability")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if not self.dt_hours > 0:
            raise ValueError("dt_hours must be positive")
        object.__setattr__(self, "seed_strategy", SeedStrategy(self.seed_strategy))


@dataclass(frozen=True, eq=False, repr=False)
class PlantedGraph(Graph):
    """A generated graph that remembers its planted blocks and core (by vertex index)."""

    blocks: np.ndarray = None
    core: np.ndarray = None
    spec: NetworkSpec = None


# -- network generation -----------------------------------------------------

def _tri_pairs(idx: np.ndarray, s: int):
    """Map upper-triangle pair indices of an s x s matrix to (i, j), i < j."""
    idx = idx.astype(np.int64)
    i = np.floor(((2 * s - 1) - np.sqrt((2.0 * s - 1) ** 2 - 8.0 * idx)) / 2).astype(np.int64)
    # float correction at the row boundaries
    row_start = i * (2 * s - i - 1) // 2
    over = row_start > idx
    i[over] -= 1
    row_start = i * (2 * s - i - 1) // 2
    nxt = (i + 1) * (2 * s - i - 2) // 2
    under = idx >= nxt
    i[under] += 1
    row_start = i * (2 * s - i - 1) // 2
    j = idx - row_start + i + 1
    return i, j


def _sample_within(rng, s: int, p: float):
    total = s * (s - 1) // 2
    if total == 0 or p <= 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    if p >= 1:
        idx = np.arange(total)
    else:
        cnt = rng.binomial(total, p)
        idx = np.sort(rng.choice(total, cnt, replace=False))
    return _tri_pairs(idx, s)


def _sample_between(rng, blocks: np.ndarray, sizes: np.ndarray, p: float):
    n = blocks.shape[0]
    total = n * (n - 1) // 2 - int(np.sum(sizes * (sizes - 1) // 2))
    if total == 0 or p <= 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    target = rng.binomial(total, p)
    keys = np.zeros(0, dtype=np.int64)
    while keys.shape[0] < target:
        need = target - keys.shape[0]
        batch = int(need * 1.3) + 16
        a = rng.integers(0, n, batch)
        b = rng.integers(0, n, batch)
        ok = blocks[a] != blocks[b]
        lo, hi = np.minimum(a[ok], b[ok]), np.maximum(a[ok], b[ok])
        new = lo * n + hi
        # keep first occurrences in draw order so the result is seed-determined
        merged = np.concatenate([keys, new])
        _, first = np.unique(merged, return_index=True)
        keys = merged[np.sort(first)]
    keys = keys[:target]
    return keys // n, keys % n


def planted_partition(sizes, p_intra: float, p_inter: float, rng):
    """Edge arrays and block labels for a planted-partition graph."""
    sizes = np.asarray(sizes, dtype=np.int64)
    blocks = np.repeat(np.arange(sizes.shape[0]), sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    us, vs = [], []
    for off, s in zip(offsets.tolist(), sizes.tolist()):
        i, j = _sample_within(rng, s, p_intra)
        us.append(i + off)
        vs.append(j + off)
    i, j = _sample_between(rng, blocks, sizes, p_inter)
    us.append(i)
    vs.append(j)
    return np.concatenate(us), np.concatenate(vs), blocks


def _close_triangles(rng, n, u, v, p_tri):
    """Each edge endpoint closes a triangle with probability ``p_tri``."""
    if p_tri <= 0 or u.shape[0] == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    deg = np.bincount(rows, minlength=n)
    start = np.concatenate([[0], np.cumsum(deg)[:-1]])
    n_close = rng.binomial(deg, p_tri)
    n_close[deg < 2] = 0
    centre = np.repeat(np.arange(n), n_close)
    if centre.shape[0] == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    d = deg[centre]
    a = rng.integers(0, d)
    b = rng.integers(0, d - 1)
    b = b + (b >= a)
    return cols[start[centre] + a], cols[start[centre] + b]


def generate_network(spec: NetworkSpec) -> PlantedGraph:
    """Planted partition + dense core + triangle closing, deterministic in ``spec.seed``."""
    root = np.random.SeedSequence([spec.seed, 0xC0FE])
    r_pp, r_core, r_tri = (np.random.default_rng(s) for s in root.spawn(3))
    n = spec.n_vertices
    u, v, blocks = planted_partition([spec.community_size] * spec.n_communities,
                                     spec.p_intra, spec.p_inter, r_pp)

    core = np.sort(r_core.choice(n, spec.core_size, replace=False)) if spec.core_size else np.zeros(0, np.int64)
    cu, cv = [u], [v]
    if core.shape[0] > 1:
        i, j = np.triu_indices(core.shape[0], 1)
        cu.append(core[i])
        cv.append(core[j])
    if core.shape[0] and spec.p_core > 0:
        is_core = np.zeros(n, bool)
        is_core[core] = True
        periphery = np.flatnonzero(~is_core)
        for c in core.tolist():
            hits = periphery[r_core.random(periphery.shape[0]) < spec.p_core]
            cu.append(np.full(hits.shape[0], c))
            cv.append(hits)
    u, v = np.concatenate(cu), np.concatenate(cv)
    tu, tv = _close_triangles(r_tri, n, u, v, spec.p_tri)
    u, v = np.concatenate([u, tu]), np.concatenate([v, tv])
    if u.shape[0] == 0:
        raise ValueError("network spec produced an edgeless graph")

    width = len(str(max(n - 1, 0)))
    ids = [f"v{i:0{width}d}" for i in range(n)]
    g = from_index_edges(ids, u, v)
    # zero-padded ids keep index order == generation order
    return PlantedGraph(g.ids, g.indptr, g.indices, g.n_self_loops_dropped, g._index,
                        blocks=blocks, core=core, spec=spec)


# -- seeding ----------------------------------------------------------------

@dataclass
class NetworkRoles:
    """Community label, core flag and periphery set per vertex index."""

    blocks: np.ndarray
    is_core: np.ndarray
    periphery: np.ndarray
    members: list = field(default_factory=list)  # non-core vertex indices per community


_ROLE_CACHE: "weakref.WeakKeyDictionary[Graph, NetworkRoles]" = weakref.WeakKeyDictionary()


def network_roles(g: Graph) -> NetworkRoles:
    """Planted roles for generated graphs; detected communities and k_max-shell otherwise."""
    if g in _ROLE_CACHE:
        return _ROLE_CACHE[g]
    from .kshell import k_shell_decompose

    shells = k_shell_decompose(g).shell_array
    if isinstance(g, PlantedGraph) and g.blocks is not None:
        blocks = g.blocks
        is_core = np.zeros(g.n, bool)
        is_core[g.core] = True
    else:
        from .community import detect_communities

        blocks = detect_communities(g).labels
        is_core = shells == shells.max() if g.n else np.zeros(0, bool)
    rest = np.flatnonzero(~is_core)
    # periphery: lowest quarter of non-core vertices by (shell, degree, index)
    order = rest[np.lexsort((rest, g.degrees[rest], shells[rest]))]
    periphery = np.sort(order[: max(1, order.shape[0] // 4)]) if order.shape[0] else order
    members = [np.flatnonzero((blocks == c) & ~is_core) for c in range(int(blocks.max()) + 1)]
    roles = NetworkRoles(blocks, is_core, periphery, members)
    _ROLE_CACHE[g] = roles
    return roles


def choose_seeds(g: Graph, n_seeds: int, strategy, rng) -> np.ndarray:
    strategy = SeedStrategy(strategy)
    if n_seeds > g.n:
        raise ValueError("more seeds than vertices")
    if strategy is SeedStrategy.UNIFORM:
        return np.sort(rng.choice(g.n, n_seeds, replace=False))
    roles = network_roles(g)
    if strategy is SeedStrategy.CORE:
        pool = np.flatnonzero(roles.is_core)
    elif strategy is SeedStrategy.PERIPHERY:
        pool = roles.periphery
    elif strategy is SeedStrategy.CONCENTRATED:
        ok = [c for c, mem in enumerate(roles.members) if mem.shape[0] >= n_seeds]
        if not ok:
            raise ValueError("no community large enough for concentrated seeding")
        pool = roles.members[ok[rng.integers(len(ok))]]
    else:
        comms = [c for c, mem in enumerate(roles.members) if mem.shape[0]]
        picked = rng.permutation(comms)[: min(n_seeds, len(comms))]
        seeds = []
        for k in range(n_seeds):
            mem = roles.members[picked[k % len(picked)]]
            free = np.setdiff1d(mem, seeds, assume_unique=True)
            if free.shape[0] == 0:
                raise ValueError("communities too small for dispersed seeding")
            seeds.append(int(free[rng.integers(free.shape[0])]))
        return np.sort(np.asarray(seeds, dtype=np.int64))
    if pool.shape[0] < n_seeds:
        raise ValueError(f"{strategy.value} pool has {pool.shape[0]} vertices, need {n_seeds}")
    return np.sort(rng.choice(pool, n_seeds, replace=False))


# -- cascades ---------------------------------------------------------------

def cascade_rounds(g: Graph, seeds: np.ndarray, p: float, rng) -> list:
    """Activation rounds of an independent cascade; round 0 is the seed set."""
    indptr, indices = g.indptr, g.indices
    active = np.zeros(g.n, dtype=bool)
    frontier = np.unique(seeds)
    active[frontier] = True
    rounds = [frontier]
    while frontier.shape[0]:
        starts = indptr[frontier]
        lens = indptr[frontier + 1] - starts
        total = int(lens.sum())
        if total == 0:
            break
        offs = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
        nb = indices[offs + np.arange(total)]
        nb = nb[~active[nb]]
        hit = nb[rng.random(nb.shape[0]) < p]
        frontier = np.unique(hit)
        if frontier.shape[0] == 0:
            break
        active[frontier] = True
        rounds.append(frontier)
    return rounds


def simulate_cascade(g: Graph, spec: CascadeSpec, meme_id: str = "meme") -> MemeTrajectory:
    """Run one cascade and return its post trajectory.

    Seeds post at ``t = 0``. The ``i``-th activation (0-based, vertex order)
    of round ``r >= 1`` posts at ``r * dt + i * dt / (a_r + 1)`` where
    ``a_r`` is the round's activation count, so later events are strictly
    ordered and round ``r`` stays inside ``[r*dt, (r+1)*dt)``.
    """
    rng = np.random.default_rng(np.random.SeedSequence([spec.rng_seed, 0x5EED]))
    seeds = choose_seeds(g, spec.n_seeds, spec.seed_strategy, rng)
    rounds = cascade_rounds(g, seeds, spec.transmit_prob, rng)
    dt = spec.dt_hours
    times, verts = [], []
    for r, act in enumerate(rounds):
        a = act.shape[0]
        times.append(r * dt + np.arange(a) * dt / (a + 1) if r else np.zeros(a))
        verts.append(act)
    times = np.concatenate(times)
    verts = np.concatenate(verts)
    meta = asdict(spec)
    meta["seed_strategy"] = spec.seed_strategy.value
    meta["seeds"] = [g.ids[i] for i in seeds.tolist()]
    return MemeTrajectory(meme_id, times, tuple(g.ids[i] for i in verts.tolist()), meta)


# -- corpora ----------------------------------------------------------------

@dataclass(frozen=True)
class CorpusMix:
    """Distribution of cascade parameters across a synthetic corpus.

    ``transmit_prob`` is log-uniform on ``[p_low, p_high]``; seed strategy
    is drawn with ``strategy_weights``; seed count is uniform on
    ``[min_seeds, max_seeds]``.
    """

    p_low: float = 0.04
    p_high: float = 0.16
    min_seeds: int = 1
    max_seeds: int = 6
    strategy_weights: tuple = (
        ("dispersed_communities", 0.15),
        ("concentrated_community", 0.25),
        ("core", 0.1),
        ("periphery", 0.25),
        ("uniform", 0.25),
    )
    dt_hours: float = 4.0

    def __post_init__(self):
        if not 0.0 < self.p_low <= self.p_high <= 1.0:
            raise ValueError("need 0 < p_low <= p_high <= 1")
        if not 1 <= self.min_seeds <= self.max_seeds:
            raise ValueError("need 1 <= min_seeds <= max_seeds")
        w = [x for _, x in self.strategy_weights]
        if not w or min(w) < 0 or sum(w) <= 0:
            raise ValueError("strategy weights must be non-negative with a positive sum")
        for name, _ in self.strategy_weights:
            SeedStrategy(name)
        if not self.dt_hours > 0:
            raise ValueError("dt_hours must be positive")

    def sample(self, rng) -> dict:
        names = [s for s, _ in self.strategy_weights]
        w = np.asarray([x for _, x in self.strategy_weights], dtype=float)
        strat = names[int(rng.choice(len(names), p=w / w.sum()))]
        p = float(np.exp(rng.uniform(np.log(self.p_low), np.log(self.p_high))))
        n_seeds = int(rng.integers(self.min_seeds, self.max_seeds + 1))
        return {"transmit_prob": p, "n_seeds": n_seeds, "seed_strategy": strat, "dt_hours": self.dt_hours}


def generate_corpus(n_memes: int, network: Graph, mix: CorpusMix = CorpusMix(), rng_seed: int = 0) -> list:
    """Simulate ``n_memes`` cascades with parameters drawn from ``mix``.

    Meme ``i`` uses its own sub-stream of ``rng_seed``, so a corpus is a
    prefix of any larger corpus generated with the same seed.
    """
    if n_memes < 1:
        raise ValueError("n_memes must be >= 1")
    width = len(str(n_memes - 1))
    corpus = []
    for i in range(n_memes):
        ss = np.random.SeedSequence([rng_seed, 0xC0B, i])
        param_rng = np.random.default_rng(ss)
        params = mix.sample(param_rng)
        sim_seed = int(param_rng.integers(0, 2**63 - 1))
        spec = CascadeSpec(rng_seed=sim_seed, **params)
        corpus.append(simulate_cascade(network, spec, meme_id=f"m{i:0{width}d}"))
    return corpus
