"""Hold-out evaluation of user rankings against realized diffusion.

Cascades are split into a scoring part and a test part.  The top-ranked users
of each measurement are then judged on the test cascades by how many users
their retweets went on to activate, how fast, and how much of the test
population they reached in total.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .cascades import CascadeTree
from .errors import EmptyInputError

log = logging.getLogger(__name__)

# descendants are realized activations, not followers who merely saw the post
ATTRIBUTION = "strict-descendants"


@dataclass(frozen=True)
class EvalReport:
    metric_name: str
    avg_activated_per_minute: float
    avg_activated: float
    pct_impacted: float
    pairs: int = 0
    warning: str = ""


def split_cascades(
    cs: Sequence[CascadeTree], train_fraction: float = 0.8, seed: int = 0
) -> tuple[list[CascadeTree], list[CascadeTree]]:
    """Seeded random partition; the training part has ``round(f * |cs|)`` trees."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if len(cs) < 2:
        raise ValueError(f"need at least 2 cascades to split, got {len(cs)}")
    n_train = math.floor(train_fraction * len(cs) + 0.5)
    perm = np.random.default_rng(seed).permutation(len(cs))
    take = np.zeros(len(cs), dtype=bool)
    take[perm[:n_train]] = True
    train = [c for c, t in zip(cs, take) if t]
    test = [c for c, t in zip(cs, take) if not t]
    return train, test


def top_fraction(scores: Mapping[int, float], fraction: float) -> list[int]:
    """Highest-scoring ``ceil(fraction * |scores|)`` users, ties to smaller id."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if not scores:
        raise EmptyInputError("score table is empty")
    # guard against 0.2 * 15 == 3.0000000000000004
    k = math.ceil(round(fraction * len(scores), 9))
    ranked = sorted(scores, key=lambda u: (-scores[u], u))
    return ranked[:k]


def evaluate(
    selected: Iterable[int], test: Iterable[CascadeTree], metric_name: str = ""
) -> EvalReport:
    selected = set(selected)
    test = list(test)
    population: set[int] = set()
    impacted: set[int] = set()
    activated: list[int] = []
    rates: list[float] = []
    for c in test:
        t = c.activation_time
        population.update(t)
        for u in selected.intersection(c.parent):
            desc = c.descendants(u)
            if not desc:
                continue
            impacted.update(desc)
            seconds = max(max(t[v] for v in desc) - t[u], 1)
            activated.append(len(desc))
            rates.append(len(desc) / (seconds / 60.0))

    if not activated:
        log.warning("%s: selected users activated nobody in the test cascades", metric_name)
        return EvalReport(metric_name, 0.0, 0.0, 0.0, 0, "no-activations")
    pct = 100.0 * len(impacted) / len(population)
    return EvalReport(
        metric_name,
        avg_activated_per_minute=float(np.mean(rates)),
        avg_activated=float(np.mean(activated)),
        pct_impacted=pct,
        pairs=len(activated),
    )


def impacted_users(selected: Iterable[int], test: Iterable[CascadeTree]) -> set[int]:
    selected = set(selected)
    out: set[int] = set()
    for c in test:
        for u in selected.intersection(c.parent):
            out.update(c.descendants(u))
    return out
