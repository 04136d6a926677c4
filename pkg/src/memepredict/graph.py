"""Undirected simple graphs keyed by string source ids.

Vertices are stored in lexicographic id order and addressed internally by
their dense rank, so every index-based loop elsewhere in the package is
deterministic and independent of input order.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .io import atomic_write

log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""


@dataclass(frozen=True, eq=False, repr=False)
class Graph:
    """Immutable undirected simple graph in CSR form.

    Parameters
    ----------
    ids : tuple of str
        Vertex ids, sorted lexicographically. ``ids[i]`` is vertex ``i``.
    indptr, indices : ndarray
        CSR adjacency; neighbours of ``i`` are ``indices[indptr[i]:indptr[i+1]]``
        in ascending index order.
    """

    ids: tuple
    indptr: np.ndarray
    indices: np.ndarray
    n_self_loops_dropped: int = 0
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._index is None:
            object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.ids)})
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def m(self) -> int:
        return int(self.indices.shape[0] // 2)

    @property
    def vertices(self) -> frozenset:
        return frozenset(self.ids)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def index(self, vid: str) -> int:
        return self._index[vid]

    def __contains__(self, vid) -> bool:
        return vid in self._index

    def degree(self, vid: str) -> int:
        i = self._index[vid]
        return int(self.indptr[i + 1] - self.indptr[i])

    def neighbor_indices(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def neighbors(self, vid: str) -> list:
        return [self.ids[j] for j in self.neighbor_indices(self._index[vid])]

    def edge_array(self) -> np.ndarray:
        """(m, 2) array of index pairs with ``u < v``, sorted."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def edges(self):
        """Iterate over edges as ``(u, v)`` id pairs with ``u < v``."""
        for a, b in self.edge_array():
            yield self.ids[a], self.ids[b]

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(self.indices.shape[0], dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def from_index_edges(ids: Sequence[str], u, v) -> Graph:
    """Build a graph over ``ids`` from integer endpoint arrays.

    ``ids`` need not be sorted; endpoints index into ``ids`` as given.
    Self-loops are dropped and counted, duplicate edges collapsed.
    """
    ids = list(ids)
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    order = sorted(range(len(ids)), key=ids.__getitem__)
    if len(set(ids)) != len(ids):
        raise ValueError("vertex ids must be unique")
    rank = np.empty(len(ids), dtype=np.int64)
    rank[order] = np.arange(len(ids))
    u, v = rank[u], rank[v]

    loops = u == v
    n_loops = int(loops.sum())
    u, v = u[~loops], v[~loops]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    n = len(ids)
    key = np.unique(lo * max(n, 1) + hi)
    lo, hi = key // max(n, 1), key % max(n, 1)

    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    perm = np.lexsort((cols, rows))
    rows, cols = rows[perm], cols[perm]
    itype = np.int32 if n < 2**31 else np.int64
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    sorted_ids = tuple(ids[i] for i in order)
    return Graph(sorted_ids, indptr, cols.astype(itype), n_self_loops_dropped=n_loops)


def from_edges(edges: Iterable[tuple], vertices: Iterable[str] = ()) -> Graph:
    """Build a graph from ``(u, v)`` id pairs plus optional isolated vertices."""
    index = {}
    us, vs = [], []
    for vid in vertices:
        index.setdefault(vid, len(index))
    for a, b in edges:
        us.append(index.setdefault(a, len(index)))
        vs.append(index.setdefault(b, len(index)))
    ids = [None] * len(index)
    for vid, i in index.items():
        ids[i] = vid
    return from_index_edges(ids, us, vs)


def load_graph(path) -> Graph:
    """Read a TAB-separated edge list.

    One edge per line; ``#`` starts a comment line and blank lines are
    skipped. Lines without a TAB fall back to whitespace splitting, but must
    still hold exactly two tokens.
    """
    edges = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise GraphFormatError(f"cannot read edge list {os.fspath(path)!r}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            parts = [p.strip() for p in parts]
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise GraphFormatError(f"{os.fspath(path)}:{lineno}: expected 'u<TAB>v', got {line!r}")
            edges.append((parts[0], parts[1]))
    g = from_edges(edges)
    if g.n_self_loops_dropped:
        log.warning("dropped %d self-loop(s) from %s", g.n_self_loops_dropped, path)
    return g


def write_edgelist(g: Graph, path) -> None:
    lines = ["# schema_version=1 undirected edge list\n"]
    lines.extend(f"{a}\t{b}\n" for a, b in g.edges())
    atomic_write(path, "".join(lines))


def subgraph_components(g: Graph) -> np.ndarray:
    """Connected-component label per vertex, numbered by lowest member index."""
    from scipy.sparse.csgraph import connected_components

    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    _, labels = connected_components(g.adjacency(), directed=False)
    # relabel by first occurrence so ids follow vertex order
    _, first = np.unique(labels, return_index=True)
    remap = np.argsort(np.argsort(first))
    return remap[labels]
