"""Subjective well-being (SWB) from tri-polarity sentiment labels."""

from __future__ import annotations

import csv
import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ParseError

POSTS_HEADER = ("user", "time", "sentiment", "kind")
SWB_HEADER = ("user", "period", "n_pos", "n_neg", "n_neu", "swb")
SENTIMENTS = {"pos": "positive", "neg": "negative", "neu": "neutral"}
KINDS = ("original", "quote", "retweet")
BEFORE, DURING = "before", "during"


@dataclass(frozen=True)
class LabeledPost:
    user: str
    time: int
    sentiment: str  # positive | negative | neutral
    origin_kind: str = "original"


@dataclass(frozen=True)
class SwbRecord:
    user: str
    period: str
    n_pos: int
    n_neg: int
    n_neu: int
    swb: float


@dataclass(frozen=True)
class GroupStats:
    group: str
    users: int
    before: dict[str, float]
    during: dict[str, float]
    change: float


def swb_value(n_pos: int, n_neg: int, n_neu: int) -> float:
    """Polarity balance scaled by the square root of the non-neutral share."""
    if min(n_pos, n_neg, n_neu) < 0:
        raise ValueError("counts must be nonnegative")
    polar = n_pos + n_neg
    total = polar + n_neu
    if total == 0:
        raise ValueError("no posts")
    if polar == 0:
        return 0.0
    return (n_pos - n_neg) / polar * math.sqrt(polar / total)


# Labels are read from the input file.  Any callable with this shape can
# stand in for a sentiment classifier.
LabelProvider = Callable[[LabeledPost], str]


def passthrough_labels(post: LabeledPost) -> str:
    return post.sentiment


def user_swb(
    posts: Iterable[LabeledPost],
    boundary: int,
    min_posts: int = 5,
    labeler: LabelProvider = passthrough_labels,
) -> list[SwbRecord]:
    """Per-user SWB before and during the period starting at ``boundary``.

    Retweets are ignored.  A user gets a record for a period only with more
    than ``min_posts`` counted posts in it.
    """
    counts: dict[tuple[str, str], list[int]] = {}
    slot = {"positive": 0, "negative": 1, "neutral": 2}
    for p in posts:
        if p.origin_kind == "retweet":
            continue
        period = BEFORE if p.time < boundary else DURING
        c = counts.setdefault((p.user, period), [0, 0, 0])
        c[slot[labeler(p)]] += 1
    out = []
    for (user, period), (npos, nneg, nneu) in sorted(counts.items()):
        if npos + nneg + nneu <= min_posts:
            continue
        out.append(SwbRecord(user, period, npos, nneg, nneu, swb_value(npos, nneg, nneu)))
    return out


def _summary(x: np.ndarray) -> dict[str, float]:
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return {
        "n": int(len(x)),
        "mean": float(x.mean()),
        "median": float(med),
        "q1": float(q1),
        "q3": float(q3),
        "min": float(x.min()),
        "max": float(x.max()),
    }


def group_swb_change(
    records: Iterable[SwbRecord],
    scores: Mapping[str, float],
    fraction: float = 0.2,
) -> tuple[GroupStats, GroupStats]:
    """Compare SWB shifts of the top- and bottom-ranked users.

    Only users with a record in both periods are ranked; ties in ``scores``
    go to the smaller user id.  Users missing from ``scores`` rank as 0.
    """
    if not 0.0 < fraction <= 0.5:
        raise ValueError(f"fraction must be in (0, 0.5], got {fraction}")
    by_user: dict[str, dict[str, float]] = {}
    for r in records:
        by_user.setdefault(r.user, {})[r.period] = r.swb
    eligible = sorted(u for u, d in by_user.items() if BEFORE in d and DURING in d)
    ranked = sorted(eligible, key=lambda u: (-scores.get(u, 0.0), u))
    k = math.ceil(round(fraction * len(ranked), 9))

    def stats(name: str, users: Sequence[str]) -> GroupStats:
        if not users:
            raise EmptyInputError(f"{name} group has no users with records in both periods")
        b = np.array([by_user[u][BEFORE] for u in users])
        d = np.array([by_user[u][DURING] for u in users])
        return GroupStats(name, len(users), _summary(b), _summary(d), float(d.mean() - b.mean()))

    top = ranked[:k]
    bottom = ranked[len(ranked) - k :] if k else []
    return stats("top", top), stats("bottom", bottom)


# -- file formats ----------------------------------------------------------


def read_posts_csv(path: str | Path) -> list[LabeledPost]:
    path = Path(path)
    out = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path} is empty")
        if tuple(h.strip() for h in header) != POSTS_HEADER:
            raise ParseError(f"bad header {header!r}", line=1, path=str(path))
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", line=lineno, path=str(path))
            user, time, sent, kind = (x.strip() for x in row)
            if sent not in SENTIMENTS or kind not in KINDS:
                raise ParseError(f"bad sentiment/kind {sent!r}/{kind!r}", line=lineno, path=str(path))
            try:
                t = int(time)
            except ValueError:
                raise ParseError(f"bad time {time!r}", line=lineno, path=str(path)) from None
            out.append(LabeledPost(user, t, SENTIMENTS[sent], kind))
    return out


def write_swb_csv(records: Iterable[SwbRecord], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWB_HEADER)
        for r in records:
            w.writerow((r.user, r.period, r.n_pos, r.n_neg, r.n_neu, repr(r.swb)))


def read_swb_csv(path: str | Path) -> list[SwbRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWB_HEADER:
            raise ParseError(f"bad header {reader.fieldnames!r}", line=1, path=str(path))
        return [
            SwbRecord(r["user"], r["period"], int(r["n_pos"]), int(r["n_neg"]), int(r["n_neu"]), float(r["swb"]))
            for r in reader
        ]
