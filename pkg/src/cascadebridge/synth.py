"""Synthetic follow graphs, diffusion logs and labeled posts with planted truth.

Diffusion follows the independent cascade model over transmission edges: each
newly activated user gets one chance per follower to activate it.  Planted
bridge users are drawn from low-degree accounts, linked into a sparse
backbone of mutual follows, and transmit with a boosted probability.  Authors
of original messages are drawn in proportion to their audience size.  Each
simulation round takes 60 s plus less than 30 s of jitter, so a child's
retweet always comes after its activator's.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .cascades import ORIGINAL, RETWEET, DiffusionEvent, write_events_csv
from .graph import SocialGraph, from_edges, write_edges_csv
from .regression import DesignMatrix

log = logging.getLogger(__name__)

T0 = 1_577_836_800  # 2020-01-01T00:00:00Z
MESSAGE_SPACING = 900
ROUND_SECONDS = 60
PERIOD_SECONDS = 30 * 86_400


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 2000
    graph_model: str = "uniform_random"
    edge_param: float = 8.0  # mean degree, or edges per new node for preferential attachment
    n_messages: int = 3000
    base_activation_prob: float = 0.05
    bridge_users: int = 100
    bridge_boost: float = 5.0
    bridge_links: int = 2
    bridge_pool_quantile: float = 0.2
    swb_effect: float = -0.3
    posts_per_period: float = 12.0
    seed: int = 0

    def __post_init__(self):
        if self.graph_model not in ("preferential_attachment", "uniform_random"):
            raise ValueError(f"unknown graph_model {self.graph_model!r}")
        if not 0.0 <= self.base_activation_prob < 1.0:
            raise ValueError("base_activation_prob must be in [0, 1)")
        if self.bridge_boost < 1.0:
            raise ValueError("bridge_boost must be >= 1")
        if self.n_users < 2 or self.n_messages < 0:
            raise ValueError("need at least 2 users and a nonnegative message count")
        if not 0.0 < self.bridge_pool_quantile <= 1.0:
            raise ValueError("bridge_pool_quantile must be in (0, 1]")
        if not 0 <= self.bridge_users <= self.n_users:
            raise ValueError("bridge_users must be between 0 and n_users")

    @property
    def boundary(self) -> int:
        return T0 + PERIOD_SECONDS


@dataclass
class SynthData:
    config: SynthConfig
    graph: SocialGraph
    events: list[DiffusionEvent]
    posts: list[tuple[str, int, str, str]]
    bridges: list[str]
    retweeted_messages: int

    def ground_truth(self) -> dict:
        return {
            "config": asdict(self.config),
            "bridges": self.bridges,
            "period_boundary": self.config.boundary,
            "planted": {
                "bridge_boost": self.config.bridge_boost,
                "base_activation_prob": self.config.base_activation_prob,
                "swb_effect": self.config.swb_effect,
            },
            "messages_with_two_or_more_retweets": self.retweeted_messages,
        }


def _preferential_attachment(n: int, m: int, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Undirected Barabasi-Albert edges, seeded with an (m+1)-clique."""
    m = max(1, min(m, n - 1))
    pairs: set[tuple[int, int]] = set()
    ends: list[int] = []
    core = min(m + 1, n)
    for a in range(core):
        for b in range(a + 1, core):
            pairs.add((a, b))
            ends += [a, b]
    for v in range(core, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for u in sorted(targets):
            pairs.add((u, v))
            ends += [u, v]
    return pairs


def _uniform_random(n: int, mean_degree: float, rng: np.random.Generator) -> set[tuple[int, int]]:
    target = min(int(round(mean_degree * n / 2)), n * (n - 1) // 2)
    pairs: set[tuple[int, int]] = set()
    while len(pairs) < target:
        a, b = (int(x) for x in rng.integers(n, size=2))
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    return pairs


def _degree_of(pairs: set[tuple[int, int]], n: int) -> np.ndarray:
    deg = np.zeros(n, dtype=np.int64)
    for a, b in pairs:
        deg[a] += 1
        deg[b] += 1
    return deg


def plant_bridges(
    pairs: set[tuple[int, int]], cfg: SynthConfig, rng: np.random.Generator
) -> list[int]:
    """Choose bridge users among low-degree users and link them into a backbone.

    Each bridge gets ``bridge_links`` extra mutual follows to other bridges, so
    a message that reaches one bridge tends to travel along the others.
    Drawing from the low-degree end keeps bridges from also being the users
    with the largest audience.  ``pairs`` is extended in place.
    """
    k = cfg.bridge_users
    if k == 0:
        return []
    deg = _degree_of(pairs, cfg.n_users)
    pool = np.flatnonzero(deg <= np.quantile(deg, cfg.bridge_pool_quantile))
    if len(pool) < k:
        pool = np.argsort(deg, kind="stable")[:k]
    bridges = sorted(int(x) for x in rng.choice(pool, size=k, replace=False))
    links = min(cfg.bridge_links, k - 1)
    for b in bridges:
        others = [x for x in bridges if x != b]
        for o in rng.choice(others, size=links, replace=False):
            o = int(o)
            pairs.add((min(b, o), max(b, o)))
    return bridges


def make_graph(cfg: SynthConfig, rng: np.random.Generator) -> tuple[SocialGraph, list[int]]:
    """Mutual-follow graph with planted bridges.

    Every undirected pair becomes two directed edges.
    """
    if cfg.graph_model == "preferential_attachment":
        pairs = _preferential_attachment(cfg.n_users, int(cfg.edge_param), rng)
    else:
        pairs = _uniform_random(cfg.n_users, cfg.edge_param, rng)
    bridges = plant_bridges(pairs, cfg, rng)
    ids = [f"u{i:05d}" for i in range(cfg.n_users)]
    edges = []
    for a, b in sorted(pairs):
        edges += [(a, b), (b, a)]
    return from_edges(ids, edges), bridges


def simulate_message(
    g: SocialGraph,
    root: int,
    probs: np.ndarray,
    rng: np.random.Generator,
) -> list[tuple[int, int, int]]:
    """Independent cascade from ``root``: ``(user, round, activator)`` per activation."""
    active = {root}
    out = [(root, 0, -1)]
    frontier = [root]
    rnd = 0
    while frontier:
        rnd += 1
        nxt = []
        for u in frontier:
            row = g.followers[u]
            if not row:
                continue
            hits = rng.random(len(row)) < probs[u]
            for v, hit in zip(row, hits):
                if hit and v not in active:
                    active.add(v)
                    nxt.append(v)
                    out.append((v, rnd, u))
        frontier = nxt
    return out


def generate(cfg: SynthConfig) -> SynthData:
    """Deterministic synthetic dataset for ``cfg``."""
    rng = np.random.default_rng([cfg.seed, 0])
    g, bridges = make_graph(cfg, rng)
    is_bridge = np.zeros(g.node_count, dtype=bool)
    is_bridge[bridges] = True
    probs = np.full(g.node_count, cfg.base_activation_prob)
    probs[is_bridge] = min(1.0, cfg.base_activation_prob * cfg.bridge_boost)

    ids = g.ids
    events: list[DiffusionEvent] = []
    retweeted = 0
    # originals come mostly from large accounts: posting weight is the audience size
    audience = np.array([len(r) for r in g.followers], dtype=float) + 1.0
    posters = np.random.default_rng([cfg.seed, 1]).choice(
        g.node_count, size=cfg.n_messages, p=audience / audience.sum()
    )
    for k in range(cfg.n_messages):
        mrng = np.random.default_rng([cfg.seed, 2, k])
        root = int(posters[k])
        start = T0 + k * MESSAGE_SPACING
        acts = simulate_message(g, root, probs, mrng) if cfg.base_activation_prob > 0 else [(root, 0, -1)]
        jitter = mrng.integers(0, ROUND_SECONDS // 2, size=len(acts))
        mids: dict[int, str] = {}
        for j, ((u, rnd, src), jit) in enumerate(zip(acts, jitter)):
            if src < 0:
                mid = f"m{k}"
                events.append(DiffusionEvent(mid, ids[u], start, None, ORIGINAL))
            else:
                mid = f"m{k}r{j}"
                t = start + rnd * ROUND_SECONDS + int(jit)
                events.append(DiffusionEvent(mid, ids[u], t, mids[src], RETWEET))
            mids[u] = mid
        if len(acts) >= 3:
            retweeted += 1
    if retweeted == 0:
        log.warning("simulation produced 0 cascades with two or more retweets")

    posts = _make_posts(cfg, g, is_bridge)
    return SynthData(cfg, g, events, posts, [ids[b] for b in bridges], retweeted)


def _make_posts(cfg: SynthConfig, g: SocialGraph, is_bridge: np.ndarray) -> list[tuple[str, int, str, str]]:
    rng = np.random.default_rng([cfg.seed, 3])
    n = g.node_count
    base = 0.5 + rng.normal(0.0, 0.1, size=n)
    share = {
        "before": np.clip(base + 0.05, 0.0, 1.0),
        "during": np.clip(base - 0.05 + cfg.swb_effect * is_bridge, 0.0, 1.0),
    }
    starts = {"before": T0, "during": cfg.boundary}
    rows = []
    for u in range(n):
        for period in ("before", "during"):
            k = int(rng.poisson(cfg.posts_per_period))
            times = np.sort(rng.integers(0, PERIOD_SECONDS, size=k)) + starts[period]
            draws = rng.random((k, 3))
            for t, (r_neu, r_pol, r_kind) in zip(times.tolist(), draws):
                if r_neu < 0.25:
                    sent = "neu"
                else:
                    sent = "pos" if r_pol < share[period][u] else "neg"
                kind = "retweet" if r_kind < 0.15 else ("quote" if r_kind < 0.25 else "original")
                rows.append((g.ids[u], t, sent, kind))
    return rows


def write_dataset(data: SynthData, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "edges": out / "edges.csv",
        "events": out / "events.csv",
        "posts": out / "posts.csv",
        "ground_truth": out / "ground_truth.json",
    }
    write_edges_csv(data.graph, paths["edges"])
    write_events_csv(data.events, paths["events"])
    with paths["posts"].open("w", encoding="utf-8", newline="") as fh:
        fh.write("user,time,sentiment,kind\n")
        for user, t, sent, kind in data.posts:
            fh.write(f"{user},{t},{sent},{kind}\n")
    paths["ground_truth"].write_text(
        json.dumps(data.ground_truth(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return paths


REGRESSION_COLUMNS = ("in_degree", "out_degree", "pagerank", "betweenness", "activity", "ubm")


def planted_regression_design(
    n: int = 2000, ubm_coef: float = -1.8, noise_sd: float = 0.3, seed: int = 0
) -> tuple[DesignMatrix, dict[str, float]]:
    """Correlated heavy-tailed predictors with a known linear response.

    Returns the design matrix and the raw-scale coefficients used to build
    ``y``.  The UBM column lies in (0, 1) like real UBM values.
    """
    rng = np.random.default_rng(seed)
    corr = np.array([
        [1.0, 0.5, 0.6, 0.4, 0.3, 0.3],
        [0.5, 1.0, 0.3, 0.2, 0.3, 0.2],
        [0.6, 0.3, 1.0, 0.3, 0.2, 0.2],
        [0.4, 0.2, 0.3, 1.0, 0.2, 0.3],
        [0.3, 0.3, 0.2, 0.2, 1.0, 0.4],
        [0.3, 0.2, 0.2, 0.3, 0.4, 1.0],
    ])
    z = rng.standard_normal((n, 6)) @ np.linalg.cholesky(corr).T
    X = np.column_stack([
        np.round(np.exp(1.5 + 0.8 * z[:, 0])),  # in_degree
        np.round(np.exp(1.5 + 0.6 * z[:, 1])),  # out_degree
        np.exp(-7.5 + 0.7 * z[:, 2]),           # pagerank
        np.exp(6.0 + 1.2 * z[:, 3]),            # betweenness
        np.round(np.exp(2.5 + 0.7 * z[:, 4])),  # activity
        1.0 / (1.0 + np.exp(-z[:, 5])),         # ubm
    ])
    sd = X.std(axis=0, ddof=1)
    # weak standardized effects for the controls, planted raw effect for UBM
    std_effects = np.array([0.03, 0.0, 0.03, -0.05, 0.01, 0.0])
    coef = std_effects / sd
    coef[5] = ubm_coef
    y = 0.1 + X @ coef + rng.normal(0.0, noise_sd, size=n)
    design = DesignMatrix(REGRESSION_COLUMNS, X, y, tuple(f"u{i:05d}" for i in range(n)))
    return design, dict(zip(REGRESSION_COLUMNS, coef.tolist()))
