"""k-shell (core-number) decomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass(frozen=True, eq=False)
class KShellIndex:
    graph: Graph
    shell_array: np.ndarray  # shell index per vertex index

    @property
    def k_max(self) -> int:
        return int(self.shell_array.max()) if self.shell_array.size else 0

    @property
    def shell(self) -> dict:
        return dict(zip(self.graph.ids, self.shell_array.tolist()))

    def __getitem__(self, vid) -> int:
        return int(self.shell_array[self.graph.index(vid)])

    def get(self, vid, default=None):
        if vid in self.graph:
            return self[vid]
        return default

    def kmax_shell(self) -> frozenset:
        """Ids of the vertices in the highest shell (the network core)."""
        if not self.shell_array.size:
            return frozenset()
        idx = np.flatnonzero(self.shell_array == self.k_max)
        return frozenset(self.graph.ids[i] for i in idx)

    def top_fraction(self, fraction: float) -> frozenset:
        """Vertices whose shell is at least the shell of the top ``fraction`` rank.

        Ties at the cut-off shell are included, so the set can exceed
        ``ceil(fraction * n)`` vertices.
        """
        n = self.shell_array.size
        if n == 0:
            return frozenset()
        count = max(1, int(np.ceil(fraction * n)))
        cutoff = np.sort(self.shell_array)[::-1][count - 1]
        idx = np.flatnonzero(self.shell_array >= cutoff)
        return frozenset(self.graph.ids[i] for i in idx)


def k_shell_decompose(g: Graph) -> KShellIndex:
    """Assign each vertex its k-shell index.

    Stage ``k`` repeatedly strips every vertex of remaining degree ``<= k``
    and labels it ``k``. This is computed with the linear-time bucket
    method of Batagelj and Zaversnik, which yields the same labels (the
    core number) without materialising each stage.
    """
    n = g.n
    if n == 0:
        return KShellIndex(g, np.zeros(0, dtype=np.int64))
    deg = g.degrees.astype(np.int64)
    md = int(deg.max())
    # bin[d] = start offset of degree-d vertices in `vert`
    counts = np.bincount(deg, minlength=md + 1)
    bins = np.zeros(md + 1, dtype=np.int64)
    np.cumsum(counts[:-1], out=bins[1:])
    vert = np.argsort(deg, kind="stable")
    pos = np.empty(n, dtype=np.int64)
    pos[vert] = np.arange(n)

    deg_l = deg.tolist()
    bin_l = bins.tolist()
    vert_l = vert.tolist()
    pos_l = pos.tolist()
    indptr = g.indptr.tolist()
    nbrs = g.indices.tolist()

    for i in range(n):
        v = vert_l[i]
        dv = deg_l[v]
        for j in range(indptr[v], indptr[v + 1]):
            u = nbrs[j]
            du = deg_l[u]
            if du > dv:
                # swap u to the front of its bin, then shrink that bin
                pu = pos_l[u]
                pw = bin_l[du]
                w = vert_l[pw]
                if u != w:
                    vert_l[pu], vert_l[pw] = w, u
                    pos_l[u], pos_l[w] = pw, pu
                bin_l[du] = pw + 1
                deg_l[u] = du - 1
    return KShellIndex(g, np.asarray(deg_l, dtype=np.int64))
