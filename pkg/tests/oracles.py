"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction

import numpy as np


def alpha_from_paths(path_set, u) -> Fraction:
    """Bridging value straight from the path-set definition, in exact arithmetic."""
    total = Fraction(0)
    for s in path_set:
        if u in s:
            total += Fraction(len(s) - s.index(u), len(s))
    return total / len(path_set)


def ubm_from_paths(cascade_paths: list[list[tuple]]) -> dict:
    """UBM over a list of cascades, each given as (root, list-of-paths)."""
    sums: dict = {}
    counts: dict = {}
    for path_set in cascade_paths:
        root = path_set[0][0]
        users = {u for s in path_set for u in s} - {root}
        for u in users:
            a = alpha_from_paths(path_set, u)
            if a > 0:
                sums[u] = sums.get(u, Fraction(0)) + a
                counts[u] = counts.get(u, 0) + 1
    denom = max(counts.values())
    return {u: sums[u] / denom for u in sums}


def enumerate_paths(parent: dict, root) -> list[tuple]:
    """Root-to-leaf paths by walking up from every leaf (no child lists)."""
    nodes = set(parent) | {root}
    has_child = set(parent.values())
    out = []
    for leaf in nodes - has_child:
        p = [leaf]
        while p[-1] != root:
            p.append(parent[p[-1]])
        out.append(tuple(reversed(p)))
    return out


def dense_pagerank(n, walk_edges, damping, weights=None, tol=1e-15, max_iter=100000):
    """Dense power iteration. ``walk_edges`` are (from, to) walker moves."""
    M = np.zeros((n, n))
    rows = {}
    for k, (a, b) in enumerate(walk_edges):
        w = 1.0 if weights is None else weights[k]
        rows.setdefault(a, []).append((b, w))
    for a in range(n):
        out = rows.get(a)
        if not out:
            M[:, a] = 1.0 / n
            continue
        tot = sum(w for _, w in out)
        for b, w in out:
            M[b, a] += (w / tot) if tot > 0 else 1.0 / len(out)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nx = damping * M @ x + (1 - damping) / n
        if np.abs(nx - x).sum() < tol:
            return nx
        x = nx
    return x


def brute_betweenness(n, succ) -> list[Fraction]:
    """Enumerate every shortest path explicitly and count intermediaries."""
    def bfs(s):
        dist = {s: 0}
        q = deque([s])
        while q:
            v = q.popleft()
            for w in succ[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    q.append(w)
        return dist

    dists = [bfs(s) for s in range(n)]
    cb = [Fraction(0)] * n
    for s, t in itertools.permutations(range(n), 2):
        if t not in dists[s]:
            continue
        paths = []

        def walk(path):
            v = path[-1]
            if v == t:
                paths.append(path)
                return
            for w in succ[v]:
                if dists[s].get(w) == len(path) and dists[w].get(t, -1) == dists[s][t] - len(path):
                    walk(path + [w])

        walk([s])
        for path in paths:
            for v in path[1:-1]:
                cb[v] += Fraction(1, len(paths))
    return cb


def exact_ols(X_rows, y):
    """Normal equations in rational arithmetic. Returns (beta, se2, r2) as Fractions."""
    n = len(y)
    A = [[Fraction(1)] + [Fraction(v) for v in row] for row in X_rows]
    yv = [Fraction(v) for v in y]
    k = len(A[0])
    XtX = [[sum(A[r][i] * A[r][j] for r in range(n)) for j in range(k)] for i in range(k)]
    Xty = [sum(A[r][i] * yv[r] for r in range(n)) for i in range(k)]
    inv = _invert(XtX)
    beta = [sum(inv[i][j] * Xty[j] for j in range(k)) for i in range(k)]
    resid = [yv[r] - sum(A[r][i] * beta[i] for i in range(k)) for r in range(n)]
    rss = sum(e * e for e in resid)
    ybar = sum(yv) / n
    tss = sum((v - ybar) ** 2 for v in yv)
    s2 = rss / (n - k)
    se2 = [s2 * inv[i][i] for i in range(k)]
    return beta, se2, 1 - rss / tss


def _invert(M):
    k = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(k)] for i, row in enumerate(M)]
    for col in range(k):
        piv = next(r for r in range(col, k) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[k:] for row in aug]


def random_tree(rng, users, max_nodes):
    """Random recursive tree over distinct users with increasing times."""
    size = int(rng.integers(3, max_nodes + 1))
    nodes = [int(x) for x in rng.choice(users, size=size, replace=False)]
    parent = {}
    for i in range(1, size):
        parent[nodes[i]] = nodes[int(rng.integers(0, i))]
    times = {u: 10 * i for i, u in enumerate(nodes)}
    return nodes[0], parent, times
