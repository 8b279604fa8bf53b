"""Reconstruct retweet cascade trees from a follow graph and an event log."""

from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import EmptyInputError, InvariantError, ParseError
from .graph import SocialGraph

log = logging.getLogger(__name__)

EVENTS_HEADER = ("message_id", "user", "time", "origin_id", "kind")
ORIGINAL = "original"
RETWEET = "retweet"


@dataclass(frozen=True)
class DiffusionEvent:
    """One post or retweet.  Quotes are ingested as retweets."""

    message_id: str
    user: str
    time: int
    origin_id: str | None = None
    kind: str = ORIGINAL

    def __post_init__(self):
        if self.kind not in (ORIGINAL, RETWEET):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if (self.kind == RETWEET) != (self.origin_id is not None):
            raise ValueError(
                f"event {self.message_id}: origin_id must be set iff kind is retweet"
            )


@dataclass(eq=False)
class CascadeTree:
    """Activation tree of one original message.

    ``parent`` maps every non-root user to the user that activated it and
    ``activation_time`` holds the (re)tweet time of every node, root included.
    """

    message_id: str
    root: int
    parent: dict[int, int]
    activation_time: dict[int, int]

    @property
    def size(self) -> int:
        return len(self.activation_time)

    @cached_property
    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {u: [] for u in self.activation_time}
        for c, p in self.parent.items():
            kids[p].append(c)
        t = self.activation_time
        for row in kids.values():
            row.sort(key=lambda u: (t[u], u))
        return kids

    @cached_property
    def depth(self) -> dict[int, int]:
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            u = stack.pop()
            for c in self.children[u]:
                depth[c] = depth[u] + 1
                stack.append(c)
        return depth

    def leaves(self) -> list[int]:
        return [u for u, kids in self.children.items() if not kids]

    def descendants(self, u: int) -> list[int]:
        """Strict descendants of ``u`` in preorder."""
        out: list[int] = []
        stack = list(reversed(self.children[u]))
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    def to_json(self, g: SocialGraph) -> dict:
        ids = g.ids
        t = self.activation_time
        order = sorted(t, key=lambda u: (t[u], u))
        return {
            "message_id": self.message_id,
            "root": ids[self.root],
            "parent": {ids[c]: ids[self.parent[c]] for c in order if c != self.root},
            "activation_time": {ids[u]: t[u] for u in order},
        }

    @classmethod
    def from_json(cls, obj: dict, g: SocialGraph) -> CascadeTree:
        ix = g.index
        try:
            return cls(
                message_id=str(obj["message_id"]),
                root=ix[obj["root"]],
                parent={ix[c]: ix[p] for c, p in obj["parent"].items()},
                activation_time={ix[u]: int(t) for u, t in obj["activation_time"].items()},
            )
        except KeyError as exc:
            raise ParseError(f"cascade references unknown key {exc}") from None


@dataclass
class BuildReport:
    events: int = 0
    originals: int = 0
    cascades: int = 0
    unknown_origin: int = 0
    unknown_user: int = 0
    unattached: int = 0
    duplicate_retweets: int = 0
    too_small: int = 0
    duplicate_message_ids: int = 0


@dataclass(frozen=True)
class CascadeStats:
    count: int
    mean_size: float | None  # None when there are no cascades


def _resolve_originals(
    events: Sequence[DiffusionEvent], report: BuildReport
) -> dict[str, list[DiffusionEvent]]:
    """Group retweets under the original message they ultimately point to."""
    by_id: dict[str, DiffusionEvent] = {}
    for e in events:
        if e.message_id in by_id:
            report.duplicate_message_ids += 1
            continue
        by_id[e.message_id] = e

    resolved: dict[str, str | None] = {}

    def resolve(mid: str) -> str | None:
        chain = []
        cur: str | None = mid
        while cur is not None and cur not in resolved:
            e = by_id.get(cur)
            if e is None:
                cur = None
                break
            if e.kind == ORIGINAL:
                resolved[cur] = cur
                break
            if cur in chain:  # cyclic retweet chain
                cur = None
                break
            chain.append(cur)
            cur = e.origin_id
        root = resolved.get(cur) if cur is not None else None
        for m in chain:
            resolved[m] = root
        return root

    groups: dict[str, list[DiffusionEvent]] = defaultdict(list)
    for e in by_id.values():
        if e.kind == RETWEET:
            orig = resolve(e.origin_id)  # type: ignore[arg-type]
            if orig is None:
                report.unknown_origin += 1
                continue
            groups[orig].append(e)
    return {mid: groups.get(mid, []) for mid, e in by_id.items() if e.kind == ORIGINAL}


def _assemble(
    g: SocialGraph, original: DiffusionEvent, retweets: list[DiffusionEvent]
) -> tuple[CascadeTree | None, dict[str, int]]:
    counts = {"unknown_user": 0, "unattached": 0, "duplicate_retweets": 0}
    ix = g.index
    root = ix[original.user]
    activation = {root: original.time}
    parent: dict[int, int] = {}

    acts = []
    for e in retweets:
        u = ix.get(e.user)
        if u is None:
            counts["unknown_user"] += 1
        else:
            acts.append((e.time, u))
    acts.sort()

    for t, u in acts:
        if u in activation:
            counts["duplicate_retweets"] += 1
            continue
        best = -1
        best_t = None
        for p in g.followees[u]:
            tp = activation.get(p)
            if tp is None or tp >= t:
                continue
            # latest prior retweeter wins; followees are sorted so the first
            # one seen at a given time is the smallest id
            if best_t is None or tp > best_t:
                best, best_t = p, tp
        if best < 0:
            counts["unattached"] += 1
            continue
        parent[u] = best
        activation[u] = t

    if len(parent) < 2:
        return None, counts
    return CascadeTree(original.message_id, root, parent, activation), counts


def build_cascades(
    g: SocialGraph, events: Iterable[DiffusionEvent], threads: int = 1
) -> tuple[list[CascadeTree], BuildReport]:
    """One cascade tree per original message retweeted by at least two users.

    Each retweeter is attached under the followee who (re)tweeted the message
    most recently before them.  Retweeters that follow no earlier participant
    are left out of the tree.  Trees are returned ordered by root time, then
    message id.
    """
    events = list(events)
    report = BuildReport(events=len(events))
    groups = _resolve_originals(events, report)
    originals = {e.message_id: e for e in events if e.kind == ORIGINAL}

    jobs = []
    for mid, rts in groups.items():
        orig = originals[mid]
        if orig.user not in g.index:
            report.unknown_user += 1 + len(rts)
            continue
        jobs.append((orig, rts))
    report.originals = len(groups)
    jobs.sort(key=lambda j: (j[0].time, j[0].message_id))

    def work(job):
        return _assemble(g, *job)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    trees = []
    for tree, counts in results:
        report.unknown_user += counts["unknown_user"]
        report.unattached += counts["unattached"]
        report.duplicate_retweets += counts["duplicate_retweets"]
        if tree is None:
            report.too_small += 1
        else:
            trees.append(tree)
    report.cascades = len(trees)
    skipped = report.unknown_origin + report.unknown_user + report.unattached
    if skipped:
        log.info(
            "skipped events: %d unknown origin, %d unknown user, %d unattached",
            report.unknown_origin,
            report.unknown_user,
            report.unattached,
        )
    return trees, report


def paths(c: CascadeTree) -> list[tuple[int, ...]]:
    """Root-to-leaf paths, one per leaf, children visited in activation order."""
    out: list[tuple[int, ...]] = []
    kids = c.children
    stack: list[tuple[int, ...]] = [(c.root,)]
    while stack:
        p = stack.pop()
        row = kids[p[-1]]
        if not row:
            out.append(p)
            continue
        for ch in reversed(row):
            stack.append(p + (ch,))
    return out


def cascade_stats(cs: Iterable[CascadeTree]) -> CascadeStats:
    sizes = [c.size for c in cs]
    if not sizes:
        return CascadeStats(0, None)
    return CascadeStats(len(sizes), sum(sizes) / len(sizes))


def validate_tree(c: CascadeTree, g: SocialGraph | None = None) -> None:
    """Raise :class:`InvariantError` unless ``c`` is a well-formed cascade tree."""
    t = c.activation_time
    if c.root not in t or c.root in c.parent:
        raise InvariantError(f"{c.message_id}: root missing or has a parent")
    if set(c.parent) | {c.root} != set(t):
        raise InvariantError(f"{c.message_id}: node set mismatch")
    for child, par in c.parent.items():
        if par not in t:
            raise InvariantError(f"{c.message_id}: dangling parent {par}")
        if not t[child] > t[par]:
            raise InvariantError(f"{c.message_id}: child {child} not after parent {par}")
        if g is not None and not g.has_edge(par, child):
            raise InvariantError(f"{c.message_id}: tree edge {par}->{child} not in graph")
    # every node must reach the root (rules out cycles)
    if len(c.depth) != len(t):
        raise InvariantError(f"{c.message_id}: not connected to root")


# -- file formats ----------------------------------------------------------


def parse_events(rows: Iterable[Sequence[str]], first_line: int = 2) -> Iterator[DiffusionEvent]:
    for lineno, row in enumerate(rows, start=first_line):
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(f"expected 5 fields, got {len(row)}", line=lineno)
        mid, user, time, origin, kind = (x.strip() for x in row)
        if kind == "quote":
            kind = RETWEET
        try:
            yield DiffusionEvent(mid, user, int(time), origin or None, kind)
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None


def read_events_csv(path: str | Path) -> list[DiffusionEvent]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"{path} is empty")
        if tuple(h.strip() for h in header) != EVENTS_HEADER:
            raise ParseError(f"bad header {header!r}", line=1, path=str(path))
        try:
            return list(parse_events(reader))
        except ParseError as exc:
            raise ParseError(exc.reason, line=exc.line, path=str(path)) from None


def write_events_csv(events: Iterable[DiffusionEvent], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENTS_HEADER)
        for e in events:
            w.writerow((e.message_id, e.user, e.time, e.origin_id or "", e.kind))


def write_cascades_jsonl(cs: Iterable[CascadeTree], g: SocialGraph, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for c in cs:
            fh.write(json.dumps(c.to_json(g), separators=(",", ":")))
            fh.write("\n")


def read_cascades_jsonl(path: str | Path, g: SocialGraph) -> list[CascadeTree]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(CascadeTree.from_json(json.loads(line), g))
            except (ParseError, json.JSONDecodeError, AttributeError, TypeError) as exc:
                raise ParseError(str(exc), line=lineno, path=str(path)) from None
    return out
