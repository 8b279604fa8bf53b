import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cascadebridge.errors import EmptyInputError, ParseError
from cascadebridge.swb import (
    LabeledPost,
    SwbRecord,
    group_swb_change,
    read_posts_csv,
    read_swb_csv,
    swb_value,
    user_swb,
    write_swb_csv,
)

counts = st.integers(0, 500)


def test_examples():
    assert swb_value(0, 0, 7) == 0
    assert swb_value(5, 0, 0) == 1.0
    assert swb_value(3, 1, 4) == pytest.approx(0.5 * math.sqrt(0.5), abs=1e-12)
    with pytest.raises(ValueError):
        swb_value(0, 0, 0)
    with pytest.raises(ValueError):
        swb_value(-1, 2, 0)


@given(counts, counts, counts)
def test_bounded_and_antisymmetric(p, n, u):
    if p + n + u == 0:
        return
    v = swb_value(p, n, u)
    assert -1 <= v <= 1
    assert swb_value(n, p, u) == -v


@given(st.integers(1, 30), st.integers(0, 30), st.integers(0, 30), st.integers(2, 5))
def test_magnitude_grows_with_polar_count(p, n, u, k):
    assert abs(swb_value(k * p, k * n, u)) >= abs(swb_value(p, n, u)) - 1e-15


@given(counts, counts, counts)
def test_neutral_posts_shrink_magnitude(p, n, u):
    if p == n:
        return
    assert abs(swb_value(p, n, u + 1)) < abs(swb_value(p, n, u))


def posts_for(user, k, t0, sentiment="positive", kind="original"):
    return [LabeledPost(user, t0 + i, sentiment, kind) for i in range(k)]


def test_threshold_and_retweet_exclusion():
    posts = posts_for("a", 6, 0) + posts_for("a", 2, 1000)
    recs = user_swb(posts, boundary=1000)
    assert [(r.user, r.period) for r in recs] == [("a", "before")]
    assert user_swb(posts_for("b", 20, 0, kind="retweet"), boundary=10) == []
    quotes = posts_for("c", 6, 0, "negative", kind="quote")
    (r,) = user_swb(quotes, boundary=1000)
    assert r.n_neg == 6 and r.swb == -1.0


def test_recount_oracle():
    rng = np.random.default_rng(0)
    sents = ["positive", "negative", "neutral"]
    kinds = ["original", "quote", "retweet"]
    posts = [
        LabeledPost(f"u{rng.integers(20)}", int(rng.integers(0, 200)),
                    sents[rng.integers(3)], kinds[rng.integers(3)])
        for _ in range(2000)
    ]
    got = {(r.user, r.period): (r.n_pos, r.n_neg, r.n_neu) for r in user_swb(posts, 100, 5)}
    want = {}
    for p in posts:
        if p.origin_kind == "retweet":
            continue
        key = (p.user, "before" if p.time < 100 else "during")
        c = want.setdefault(key, [0, 0, 0])
        c[sents.index(p.sentiment)] += 1
    want = {k: tuple(v) for k, v in want.items() if sum(v) > 5}
    assert got == want


def test_custom_labeler():
    posts = posts_for("a", 8, 0, "neutral")
    (r,) = user_swb(posts, 100, labeler=lambda p: "negative")
    assert r.swb == -1.0


def planted_records(rng, n, top_drop, bottom_drop, base=0.6):
    recs, scores = [], {}
    for i in range(n):
        u = f"u{i:04d}"
        top = i < n // 2
        scores[u] = 1.0 + rng.random() if top else rng.random() * 0.5
        for period, share in (("before", base), ("during", base - (top_drop if top else bottom_drop))):
            k = 400
            pos = int(rng.binomial(k, share))
            recs.append(SwbRecord(u, period, pos, k - pos, 0, swb_value(pos, k - pos, 0)))
    return recs, scores


def test_planted_shift_negative_for_top():
    rng = np.random.default_rng(1)
    recs, scores = planted_records(rng, 200, 0.3, 0.0)
    top, bottom = group_swb_change(recs, scores, 0.2)
    assert top.change < -0.4
    assert abs(bottom.change) < 0.05
    assert top.users == bottom.users == 40


def test_no_shift_null():
    rng = np.random.default_rng(2)
    recs, scores = planted_records(rng, 200, 0.0, 0.0)
    top, bottom = group_swb_change(recs, scores, 0.2)
    assert abs(top.change) < 0.03 and abs(bottom.change) < 0.03


def test_ratio_recovered():
    rng = np.random.default_rng(3)
    recs, scores = planted_records(rng, 400, 0.2, 0.1)
    top, bottom = group_swb_change(recs, scores, 0.2)
    assert top.change / bottom.change == pytest.approx(2.0, rel=0.15)


def test_group_errors_and_stats():
    recs = [SwbRecord("a", "before", 1, 0, 0, 1.0)]
    with pytest.raises(EmptyInputError, match="top"):
        group_swb_change(recs, {"a": 1.0})
    with pytest.raises(ValueError):
        group_swb_change(recs, {}, fraction=0.6)
    recs = [SwbRecord(u, p, 1, 0, 0, v) for u, v in (("a", 0.1), ("b", 0.5), ("c", 0.9))
            for p in ("before", "during")]
    top, _ = group_swb_change(recs, {"a": 3, "b": 2, "c": 1}, 0.5)
    assert top.users == 2 and top.before["median"] == pytest.approx(0.3)
    assert set(top.before) == {"n", "mean", "median", "q1", "q3", "min", "max"}


def test_csv_round_trips(tmp_path):
    p = tmp_path / "posts.csv"
    p.write_text("user,time,sentiment,kind\na,5,pos,quote\nb,6,neu,retweet\n")
    assert read_posts_csv(p) == [LabeledPost("a", 5, "positive", "quote"),
                                 LabeledPost("b", 6, "neutral", "retweet")]
    p.write_text("user,time,sentiment,kind\na,5,happy,original\n")
    with pytest.raises(ParseError):
        read_posts_csv(p)
    recs = [SwbRecord("a", "before", 3, 1, 4, swb_value(3, 1, 4))]
    q = tmp_path / "swb.csv"
    write_swb_csv(recs, q)
    assert read_swb_csv(q) == recs
