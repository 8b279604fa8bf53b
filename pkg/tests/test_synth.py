import logging

import numpy as np
import pytest

from cascadebridge.bridging import ubm, ubm_values
from cascadebridge.cascades import build_cascades, validate_tree
from cascadebridge.swb import LabeledPost, SENTIMENTS, user_swb
from cascadebridge.synth import (
    SynthConfig,
    generate,
    planted_regression_design,
    write_dataset,
)

SMALL = dict(n_users=400, n_messages=400, bridge_users=20)


def test_config_validation():
    for bad in (dict(base_activation_prob=1.0), dict(bridge_boost=0.5),
                dict(graph_model="ring"), dict(n_users=1), dict(bridge_users=10**6)):
        with pytest.raises(ValueError):
            SynthConfig(**bad)


def test_deterministic_files(tmp_path):
    cfg = SynthConfig(seed=3, **SMALL)
    a = write_dataset(generate(cfg), tmp_path / "a")
    b = write_dataset(generate(cfg), tmp_path / "b")
    for name in a:
        assert a[name].read_bytes() == b[name].read_bytes()


def test_zero_probability_warns(caplog):
    with caplog.at_level(logging.WARNING):
        data = generate(SynthConfig(base_activation_prob=0.0, **SMALL))
    assert data.retweeted_messages == 0
    assert "0 cascades" in caplog.text
    trees, _ = build_cascades(data.graph, data.events)
    assert trees == []


@pytest.mark.parametrize("model", ["uniform_random", "preferential_attachment"])
def test_logs_pass_tree_invariants(model):
    data = generate(SynthConfig(graph_model=model, edge_param=4 if model != "uniform_random" else 8,
                                seed=1, **SMALL))
    g = data.graph
    g.check()
    trees, rep = build_cascades(g, data.events)
    assert trees and rep.unknown_origin == 0 and rep.unknown_user == 0
    for c in trees:
        validate_tree(c, g)


def test_round_timing():
    data = generate(SynthConfig(seed=2, **SMALL))
    start = {e.message_id: e.time for e in data.events if e.kind == "original"}
    for e in data.events:
        if e.kind == "retweet":
            root = e.message_id.split("r")[0]
            offset = e.time - start[root]
            assert offset >= 60 and offset % 60 < 30


def bridge_mean_ubm(boost, seed=0):
    data = generate(SynthConfig(bridge_boost=boost, seed=seed))
    g = data.graph
    trees, _ = build_cascades(g, data.events)
    v = ubm_values(ubm(trees, range(g.node_count)))
    bridges = [g.index[b] for b in data.bridges]
    return np.mean([v[b] for b in bridges]), v, bridges


def test_boost_raises_bridge_ubm():
    boosted, _, _ = bridge_mean_ubm(5.0)
    plain, _, _ = bridge_mean_ubm(1.0)
    assert boosted > plain


def test_bridges_majority_of_top_five_percent():
    _, v, bridges = bridge_mean_ubm(5.0)
    top = sorted(v, key=lambda u: (-v[u], u))[: len(v) // 20]
    assert len(set(top) & set(bridges)) > len(top) / 2


def test_posts_planted_shift():
    cfg = SynthConfig(seed=4, **SMALL)
    data = generate(cfg)
    posts = [LabeledPost(u, t, SENTIMENTS[s], k) for u, t, s, k in data.posts]
    recs = user_swb(posts, cfg.boundary)
    bridges = set(data.bridges)

    def mean_change(group):
        d = {}
        for r in recs:
            d.setdefault(r.user, {})[r.period] = r.swb
        ch = [x["during"] - x["before"] for u, x in d.items() if len(x) == 2 and (u in bridges) == group]
        return np.mean(ch)

    assert mean_change(True) < mean_change(False) < 0


def test_planted_regression_design_shape():
    X, coef = planted_regression_design(n=300, seed=1)
    assert X.X.shape == (300, 6) and coef["ubm"] == -1.8
    u = X.X[:, X.columns.index("ubm")]
    assert ((u > 0) & (u < 1)).all()
