"""Topology-based baseline measurements and per-user activity counts.

PageRank and TwitterRank walk from a follower to one of the accounts it
follows, so users with a large audience collect rank.  Betweenness uses the
transmission orientation (followee -> follower) with unit edge lengths.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cascades import DiffusionEvent
from .graph import SocialGraph

METRICS = (
    "in_degree",
    "out_degree",
    "pagerank",
    "twitterrank",
    "betweenness",
    "community",
    "activity",
)


@dataclass(frozen=True, eq=False)
class CentralityVector:
    metric_name: str
    values: np.ndarray
    converged: bool = True
    iterations: int = 0

    def as_dict(self) -> dict[int, float]:
        return {u: float(x) for u, x in enumerate(self.values)}


def in_degree(g: SocialGraph) -> CentralityVector:
    return CentralityVector(
        "in_degree", np.array([len(r) for r in g.followers], dtype=float)
    )


def out_degree(g: SocialGraph) -> CentralityVector:
    return CentralityVector(
        "out_degree", np.array([len(r) for r in g.followees], dtype=float)
    )


def _walk_edges(g: SocialGraph) -> tuple[np.ndarray, np.ndarray]:
    """(follower, followee) index arrays, grouped by follower."""
    src = [v for v in range(g.node_count) for _ in g.followees[v]]
    dst = [u for v in range(g.node_count) for u in g.followees[v]]
    return np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)


def _power_iteration(
    n: int,
    src: np.ndarray,
    dst: np.ndarray,
    w: np.ndarray,
    damping: float,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, bool, int]:
    """Stationary vector of the damped walk with row-stochastic weights ``w``.

    Nodes without outgoing weight are dangling; their mass is spread uniformly.
    """
    dangling = np.ones(n, dtype=bool)
    dangling[src] = False
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        flow = np.bincount(dst, weights=x[src] * w, minlength=n)
        x_new = damping * (flow + x[dangling].sum() / n) + (1.0 - damping) / n
        x_new /= x_new.sum()
        delta = np.abs(x_new - x).sum()
        x = x_new
        if delta < tol:
            return x, True, it
    return x, False, max_iter


def _check_params(damping: float, tol: float) -> None:
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")


def pagerank(
    g: SocialGraph, damping: float = 0.85, tol: float = 1e-10, max_iter: int = 200
) -> CentralityVector:
    _check_params(damping, tol)
    n = g.node_count
    if n == 0:
        return CentralityVector("pagerank", np.zeros(0))
    src, dst = _walk_edges(g)
    outdeg = np.array([len(r) for r in g.followees], dtype=float)
    w = 1.0 / outdeg[src] if len(src) else np.zeros(0)
    x, ok, it = _power_iteration(n, src, dst, w, damping, tol, max_iter)
    return CentralityVector("pagerank", x, ok, it)


def twitterrank(
    g: SocialGraph,
    post_counts: np.ndarray | Mapping[int, float] | None = None,
    topic_sim: Mapping[tuple[int, int], float] | None = None,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 200,
    default_similarity: float = 1.0,
) -> CentralityVector:
    """PageRank variant with topic- and activity-weighted transitions.

    The walk moves from follower ``v`` to followee ``u`` with probability
    proportional to ``post_counts[u] * sim(v, u)``.  Similarities are
    symmetric; pairs missing from ``topic_sim`` get ``default_similarity``.
    A follower whose weights are all zero falls back to a uniform choice over
    its followees.
    """
    _check_params(damping, tol)
    n = g.node_count
    if n == 0:
        return CentralityVector("twitterrank", np.zeros(0))
    if post_counts is None:
        posts = np.ones(n)
    elif isinstance(post_counts, Mapping):
        posts = np.zeros(n)
        for u, k in post_counts.items():
            posts[u] = k
    else:
        posts = np.asarray(post_counts, dtype=float)
    if (posts < 0).any():
        raise ValueError("post counts must be nonnegative")

    src, dst = _walk_edges(g)
    sim = np.full(len(src), float(default_similarity))
    if topic_sim:
        for e, (v, u) in enumerate(zip(src.tolist(), dst.tolist())):
            s = topic_sim.get((v, u), topic_sim.get((u, v)))
            if s is not None:
                sim[e] = s
    if ((sim < 0) | (sim > 1)).any():
        raise ValueError("similarities must lie in [0, 1]")

    raw = posts[dst] * sim
    row = np.bincount(src, weights=raw, minlength=n)
    outdeg = np.bincount(src, minlength=n).astype(float)
    zero_row = row[src] == 0
    w = np.where(zero_row, 1.0 / np.maximum(outdeg[src], 1.0), raw / np.where(zero_row, 1.0, row[src]))
    x, ok, it = _power_iteration(n, src, dst, w, damping, tol, max_iter)
    return CentralityVector("twitterrank", x, ok, it)


def _brandes_sources(succ: tuple[tuple[int, ...], ...], sources: range) -> list[float]:
    n = len(succ)
    cb = [0.0] * n
    for s in sources:
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = [s]
        head = 0
        while head < len(queue):
            v = queue[head]
            head += 1
            stack.append(v)
            dv = dist[v] + 1
            sv = sigma[v]
            for w in succ[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sv
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                cb[w] += delta[w]
    return cb


def betweenness(g: SocialGraph, threads: int = 1, chunk: int = 64) -> CentralityVector:
    """Exact unnormalized directed betweenness (Brandes accumulation)."""
    n = g.node_count
    blocks = [range(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    succ = g.followers
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _brandes_sources(succ, b), blocks))
    else:
        parts = [_brandes_sources(succ, b) for b in blocks]
    total = np.zeros(n)
    for p in parts:  # fixed order so results do not depend on threads
        total += np.asarray(p)
    return CentralityVector("betweenness", total)


def label_propagation(g: SocialGraph, seed: int, max_iter: int = 100) -> np.ndarray:
    """Synchronous label propagation on the undirected view of ``g``.

    Each node takes the most frequent label among its neighbours and itself.
    Ties go to the label with the smallest seeded priority.  Returns dense
    community ids ``0..k-1`` numbered by first occurrence.
    """
    n = g.node_count
    rng = np.random.default_rng(seed)
    priority = rng.permutation(n).tolist()
    nbrs = [sorted(set(g.followers[u]) | set(g.followees[u])) for u in range(n)]
    labels = list(range(n))
    for _ in range(max_iter):
        new = []
        for u in range(n):
            counts = Counter(labels[v] for v in nbrs[u])
            counts[labels[u]] += 1
            top = max(counts.values())
            new.append(min((lab for lab, c in counts.items() if c == top), key=priority.__getitem__))
        if new == labels:
            break
        labels = new
    dense: dict[int, int] = {}
    return np.array([dense.setdefault(lab, len(dense)) for lab in labels], dtype=np.int64)


def community_centrality(g: SocialGraph, seed: int = 0, max_iter: int = 100) -> CentralityVector:
    """Share of all communities present in a user's closed neighbourhood."""
    n = g.node_count
    if n == 0:
        return CentralityVector("community", np.zeros(0))
    comm = label_propagation(g, seed, max_iter)
    k = int(comm.max()) + 1
    vals = np.empty(n)
    for u in range(n):
        seen = {int(comm[u])}
        seen.update(int(comm[v]) for v in g.followers[u])
        seen.update(int(comm[v]) for v in g.followees[u])
        vals[u] = len(seen) / k
    return CentralityVector("community", vals)


def activity(events: Iterable[DiffusionEvent], g: SocialGraph) -> CentralityVector:
    """Number of posts (originals and retweets) per user."""
    counts = np.zeros(g.node_count)
    ix = g.index
    for e in events:
        u = ix.get(e.user)
        if u is not None:
            counts[u] += 1
    return CentralityVector("activity", counts)
