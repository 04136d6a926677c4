"""Independent slow reference implementations used as test oracles.

These are deliberately naive: plain Python, no shared code with the
package beyond the data types they consume.
"""
import math

import numpy as np

from memepredict.trajectory import MemeTrajectory


def random_edges(rng, n, p):
    return [(f"n{i:02d}", f"n{j:02d}") for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def k_core(vertices, adj, k):
    """Maximal vertex set whose induced subgraph has min degree >= k."""
    alive = set(vertices)
    changed = True
    while changed:
        changed = False
        for v in list(alive):
            if sum(1 for u in adj[v] if u in alive) < k:
                alive.discard(v)
                changed = True
    return alive


def brute_shells(vertices, edges):
    adj = {v: set() for v in vertices}
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    shell = {v: 0 for v in vertices}
    k = 1
    while True:
        core = k_core(vertices, adj, k)
        if not core:
            return shell
        for v in core:
            shell[v] = k
        k += 1


def direct_modularity(ids, edges, labels):
    """(1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j) by double loop."""
    idx = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    A = [[0] * n for _ in range(n)]
    for u, v in edges:
        if u != v:
            A[idx[u]][idx[v]] = A[idx[v]][idx[u]] = 1
    k = [sum(row) for row in A]
    two_m = sum(k)
    total = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                total += A[i][j] - k[i] * k[j] / two_m
    return total / two_m


def best_bisection(ids, edges):
    """Exhaustive max of s^T B s / 4m over all sign vectors (s_0 fixed to +1)."""
    n = len(ids)
    best, best_s = -math.inf, None
    for mask in range(2 ** (n - 1)):
        s = [1] + [1 if (mask >> i) & 1 else -1 for i in range(n - 1)]
        q = direct_modularity(ids, edges, s)
        if q > best + 1e-12:
            best, best_s = q, s
    return best, best_s


def tree_walk(tree, x):
    node = 0
    while tree["feature"][node] >= 0:
        if x[tree["feature"][node]] <= tree["threshold"][node]:
            node = tree["left"][node]
        else:
            node = tree["right"][node]
    return tree["value"][node]


def flat_score(doc, x):
    """Score a serialized model document for one row, without numpy."""
    p = doc["parameters"]
    if doc["kind"] == "tree_ensemble":
        votes = [tree_walk(t, x) for t in p["trees"]]
        return sum(votes) / len(votes)
    logs = []
    for c in (0, 1):
        s = math.log(p["prior"][c]) if p["prior"][c] > 0 else -math.inf
        for j, xj in enumerate(x):
            var = p["var"][c][j]
            s -= 0.5 * (math.log(2 * math.pi * var) + (xj - p["mean"][c][j]) ** 2 / var)
        logs.append(s)
    top = max(logs)
    w = [math.exp(v - top) for v in logs]
    return w[1] / (w[0] + w[1])


def null_corpus(rng, n_blogs=100, n_memes=200, post_prob=0.5, early_range=(0.1, 0.3), span=100.0):
    """Successful-meme corpus in which no blog is better at posting early.

    Each blog joins each meme independently; every poster's time is an
    i.i.d. draw from a meme-specific two-part mixture (early window with a
    meme-specific probability, otherwise later), so being early is
    exchangeable across blogs.
    """
    blogs = [f"b{i:03d}" for i in range(n_blogs)]
    corpus = []
    for m in range(n_memes):
        who = np.flatnonzero(rng.random(n_blogs) < post_prob)
        if who.shape[0] < 2:
            continue
        r = rng.uniform(*early_range)
        early = rng.random(who.shape[0]) < r
        t = np.where(early, rng.uniform(0.0, 0.03 * span, who.shape[0]),
                     rng.uniform(0.03 * span, span, who.shape[0]))
        order = np.argsort(t, kind="stable")
        corpus.append(MemeTrajectory.from_events(f"m{m:04d}", [(float(t[i]), blogs[who[i]]) for i in order]))
    return corpus
