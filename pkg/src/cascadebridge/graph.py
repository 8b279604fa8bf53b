"""Immutable directed follow graph.

Edges are stored in *transmission* orientation: ``u -> v`` means ``v`` follows
``u`` so a message posted by ``u`` can reach ``v``.  Input files list
``follower,followee`` pairs and the loader flips them.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyInputError, InvariantError, ParseError

log = logging.getLogger(__name__)

EDGES_HEADER = ("follower", "followee")


@dataclass(frozen=True)
class LoadReport:
    records: int
    edges: int
    duplicates: int
    self_loops: int


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Directed graph over interned user ids ``0..node_count-1``.

    ``followers[u]`` are the transmission successors of ``u`` (its audience)
    and ``followees[u]`` the accounts ``u`` follows.  Both are sorted tuples.
    """

    ids: tuple[str, ...]
    followers: tuple[tuple[int, ...], ...]
    followees: tuple[tuple[int, ...], ...]
    index: dict[str, int] = field(repr=False)

    @property
    def node_count(self) -> int:
        return len(self.ids)

    @property
    def edge_count(self) -> int:
        return sum(len(f) for f in self.followers)

    def user_id(self, external: str) -> int:
        return self.index[external]

    def external_id(self, user: int) -> str:
        return self.ids[user]

    def __contains__(self, external: object) -> bool:
        return external in self.index

    def has_edge(self, source: int, target: int) -> bool:
        """True when ``target`` follows ``source``."""
        row = self.followers[source]
        # rows are sorted; linear scan is fine for the degrees seen here
        return target in row

    def edges(self) -> Iterable[tuple[int, int]]:
        """Transmission edges ``(source, target)`` in lexicographic order."""
        for u, row in enumerate(self.followers):
            for v in row:
                yield u, v

    def check(self) -> None:
        """Raise :class:`InvariantError` if the adjacency lists disagree."""
        transposed: list[list[int]] = [[] for _ in self.ids]
        for u, v in self.edges():
            if u == v:
                raise InvariantError(f"self-loop on {self.ids[u]}")
            transposed[v].append(u)
        for v, row in enumerate(transposed):
            if tuple(sorted(row)) != self.followees[v]:
                raise InvariantError(f"adjacency mismatch at {self.ids[v]}")
        for row in self.followers:
            if len(set(row)) != len(row):
                raise InvariantError("duplicate edge")


def from_edges(ids: Sequence[str], edges: Iterable[tuple[int, int]]) -> SocialGraph:
    """Build a graph from already-interned transmission edges.

    Duplicates and self-loops must already be removed.
    """
    n = len(ids)
    out: list[list[int]] = [[] for _ in range(n)]
    inn: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        out[u].append(v)
        inn[v].append(u)
    return SocialGraph(
        ids=tuple(ids),
        followers=tuple(tuple(sorted(r)) for r in out),
        followees=tuple(tuple(sorted(r)) for r in inn),
        index={x: i for i, x in enumerate(ids)},
    )


def load_graph(
    records: Iterable[Sequence[str]], first_line: int = 1
) -> tuple[SocialGraph, LoadReport]:
    """Intern ``(follower, followee)`` records into a :class:`SocialGraph`.

    Self-loops and duplicate records are dropped and counted.  Ids are
    assigned in order of first appearance.
    """
    index: dict[str, int] = {}
    ids: list[str] = []
    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    n_records = dups = loops = 0

    def intern(x: str) -> int:
        i = index.get(x)
        if i is None:
            i = index[x] = len(ids)
            ids.append(x)
        return i

    for lineno, rec in enumerate(records, start=first_line):
        if not rec:
            continue
        if len(rec) != 2:
            raise ParseError(f"expected 2 fields, got {len(rec)}", line=lineno)
        follower, followee = (s.strip() for s in rec)
        if not follower or not followee:
            raise ParseError("empty user id", line=lineno)
        n_records += 1
        if follower == followee:
            intern(follower)
            loops += 1
            continue
        # transmission edge runs followee -> follower
        e = (intern(followee), intern(follower))
        if e in seen:
            dups += 1
            continue
        seen.add(e)
        edges.append(e)

    if n_records == 0:
        raise EmptyInputError("edge list is empty")
    if loops or dups:
        log.warning("dropped %d self-loops and %d duplicate edges", loops, dups)
    g = from_edges(ids, edges)
    return g, LoadReport(n_records, len(edges), dups, loops)


def read_edges_csv(path: str | Path) -> tuple[SocialGraph, LoadReport]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path} is empty")
        if tuple(h.strip() for h in header) != EDGES_HEADER:
            raise ParseError(f"bad header {header!r}", line=1, path=str(path))
        try:
            return load_graph(reader, first_line=2)
        except ParseError as exc:
            raise ParseError(exc.reason, line=exc.line, path=str(path)) from None


def write_edges_csv(g: SocialGraph, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGES_HEADER)
        for u, v in g.edges():
            w.writerow((g.ids[v], g.ids[u]))


def degrees(g: SocialGraph) -> list[tuple[int, int]]:
    """Per-user ``(in_degree, out_degree)``.

    In-degree is the follower count (audience size); out-degree is the number
    of accounts the user follows.
    """
    return [(len(g.followers[u]), len(g.followees[u])) for u in range(g.node_count)]
