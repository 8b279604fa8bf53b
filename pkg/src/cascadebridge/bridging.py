"""Cascade bridging values and user bridging magnitude (UBM).

For a cascade ``C`` seen as its set of root-to-leaf paths, the bridging value
of a non-root participant ``u`` is the mean over all paths of the fraction of
the path that lies at or below ``u``.  UBM sums a user's bridging values over
all cascades and divides by the largest number of cascades any single user
took part in.

The per-cascade values are computed with a single bottom-up pass: for a node
``u`` at depth ``k``, the paths through ``u`` are exactly the paths to leaves
in its subtree, and a leaf path of length ``L`` contributes ``(L - k) / L``.
Summing over the subtree gives ``leaves(u) - k * sum(1 / L)``, so only two
subtree aggregates are needed.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .cascades import CascadeTree
from .errors import DomainError, EmptyInputError


@dataclass(frozen=True)
class BridgingScore:
    user: int
    ubm: float
    cascades_participated: int


def bridging_values(c: CascadeTree) -> dict[int, float]:
    """Bridging value of every non-root participant of ``c``."""
    kids = c.children
    depth = c.depth
    order = sorted(depth, key=depth.__getitem__, reverse=True)  # leaves first
    n_leaves: dict[int, int] = {}
    inv_len: dict[int, float] = {}
    for u in order:
        row = kids[u]
        if not row:
            n_leaves[u] = 1
            inv_len[u] = 1.0 / (depth[u] + 1)
        else:
            n_leaves[u] = sum(n_leaves[v] for v in row)
            inv_len[u] = sum(inv_len[v] for v in row)
    total = n_leaves[c.root]
    return {
        u: (n_leaves[u] - depth[u] * inv_len[u]) / total
        for u in sorted(c.parent)
    }


def cascade_bridging_value(c: CascadeTree, u: int) -> float:
    """Bridging value of ``u`` in ``c``; 0 when ``u`` did not take part."""
    if u == c.root:
        raise DomainError("bridging value is not applicable to the root user")
    return bridging_values(c).get(u, 0.0)


def _chunks(seq: Sequence, size: int):
    for i in range(0, len(seq), size):
        yield seq[i : i + size]


def ubm(
    cs: Iterable[CascadeTree],
    users: Iterable[int] = (),
    threads: int = 1,
    chunk: int = 256,
) -> dict[int, BridgingScore]:
    """User bridging magnitude of every non-root participant.

    ``users`` lists extra users (typically the whole graph) that receive an
    explicit zero score.  Roots are not participants and do not count toward
    the normalizing maximum.
    """
    cs = list(cs)
    if not cs:
        raise EmptyInputError("no cascades to score")

    def partial(block):
        sums: dict[int, float] = {}
        counts: dict[int, int] = {}
        for c in block:
            for u, a in bridging_values(c).items():
                sums[u] = sums.get(u, 0.0) + a
                counts[u] = counts.get(u, 0) + 1
        return sums, counts

    # fixed chunking keeps the float summation order independent of threads
    blocks = list(_chunks(cs, chunk))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(partial, blocks))
    else:
        parts = [partial(b) for b in blocks]

    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for s, k in parts:
        for u, a in s.items():
            sums[u] = sums.get(u, 0.0) + a
            counts[u] = counts.get(u, 0) + k[u]

    if not counts:
        raise DomainError("no cascade has a non-root participant")
    denom = max(counts.values())
    out = {
        u: BridgingScore(u, sums[u] / denom, counts[u]) for u in sorted(sums)
    }
    for u in users:
        if u not in out:
            out[u] = BridgingScore(u, 0.0, 0)
    return dict(sorted(out.items()))


def ubm_values(scores: dict[int, BridgingScore]) -> dict[int, float]:
    return {u: s.ubm for u, s in scores.items()}
