"""Command-line pipeline driver.

Settings come from built-in defaults, then ``<data_dir>/pipeline.conf`` (as
written by ``simulate``), then ``--config FILE``, then command-line flags.
Config files hold flat ``key = value`` lines; ``#`` starts a comment.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .bridging import ubm, ubm_values
from .cascades import (
    build_cascades,
    cascade_stats,
    read_cascades_jsonl,
    read_events_csv,
    validate_tree,
    write_cascades_jsonl,
)
from .centrality import (
    activity,
    betweenness,
    community_centrality,
    in_degree,
    out_degree,
    pagerank,
    twitterrank,
)
from .errors import CascadeBridgeError, InvariantError
from .evaluation import ATTRIBUTION, evaluate, split_cascades, top_fraction
from .graph import SocialGraph, read_edges_csv
from .regression import DesignMatrix, hierarchical_regression, report_json, vif_screen
from .swb import (
    BEFORE,
    DURING,
    group_swb_change,
    read_posts_csv,
    read_swb_csv,
    user_swb,
    write_swb_csv,
)
from .synth import SynthConfig, generate, write_dataset

log = logging.getLogger("cascadebridge")

ALL_METRICS = (
    "ubm", "in_degree", "out_degree", "pagerank", "twitterrank",
    "betweenness", "community", "activity",
)
TABLE1_METRICS = ("in_degree", "pagerank", "twitterrank", "betweenness", "community", "ubm")
SUBCOMMANDS = ("build-cascades", "score", "evaluate", "swb", "regress", "simulate", "pipeline")


class MissingInput(CascadeBridgeError):
    def __init__(self, path: Path | str):
        self.path = str(path)
        super().__init__(f"missing input file: {self.path}")


class ConfigError(CascadeBridgeError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"invalid value for {field}: {message}")


@dataclass
class PipelineConfig:
    data_dir: str = "data"
    out_dir: str = "out"
    edges: str = ""
    events: str = ""
    posts: str = ""
    topic_sim: str = ""
    seed: int = 0
    threads: int = 1
    train_fraction: float = 0.8
    top_fraction: float = 0.2
    min_posts: int = 5
    boundary: int | None = None
    damping: float = 0.85
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 200
    vif_threshold: float = 10.0
    metrics: str = ",".join(ALL_METRICS)
    response: str = "during"
    stages: str = "in_degree,out_degree,pagerank,twitterrank,betweenness,community;activity;ubm"
    # simulate
    n_users: int = 2000
    n_messages: int = 3000
    graph_model: str = "uniform_random"
    edge_param: float = 8.0
    base_activation_prob: float = 0.05
    bridge_users: int = 100
    bridge_boost: float = 5.0
    bridge_links: int = 2
    swb_effect: float = -0.3
    posts_per_period: float = 12.0

    def path(self, name: str) -> Path:
        explicit = getattr(self, name)
        return Path(explicit) if explicit else Path(self.data_dir) / f"{name}.csv"

    def out(self, filename: str) -> Path:
        return Path(self.out_dir) / filename

    def validate(self) -> None:
        for name in ("train_fraction", "top_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(name, f"must be in (0, 1), got {v}")
        if self.threads < 1:
            raise ConfigError("threads", "must be >= 1")
        if self.min_posts < 0:
            raise ConfigError("min_posts", "must be >= 0")
        if not 0.0 < self.damping < 1.0:
            raise ConfigError("damping", "must be in (0, 1)")
        if self.pagerank_tol <= 0:
            raise ConfigError("pagerank_tol", "must be positive")
        if self.response not in ("during", "change"):
            raise ConfigError("response", "must be 'during' or 'change'")
        bad = [m for m in self.metric_list() if m not in ALL_METRICS]
        if bad:
            raise ConfigError("metrics", f"unknown metric(s) {', '.join(bad)}")

    def metric_list(self) -> list[str]:
        return [m.strip() for m in self.metrics.split(",") if m.strip()]

    def stage_list(self) -> list[list[str]]:
        return [[c.strip() for c in grp.split(",") if c.strip()] for grp in self.stages.split(";")]


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "int | None":
            return None if raw.strip().lower() in ("", "none") else int(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    return raw


def read_config_file(path: Path) -> dict[str, object]:
    out: dict[str, object] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}", "expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(key, f"unknown config key in {path}")
        out[key] = _coerce(key, value)
    return out


def stage_seed(seed: int, stage: str) -> int:
    digest = hashlib.sha256(f"{seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


# -- helpers ---------------------------------------------------------------


def _need(path: Path) -> Path:
    if not path.is_file():
        raise MissingInput(path)
    return path


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _load_graph(cfg: PipelineConfig) -> SocialGraph:
    g, report = read_edges_csv(_need(cfg.path("edges")))
    g.check()
    return g


def _load_cascades(cfg: PipelineConfig, g: SocialGraph):
    cs = read_cascades_jsonl(_need(cfg.out("cascades.jsonl")), g)
    for c in cs:
        validate_tree(c, g)
    return cs


def read_scores_csv(path: Path) -> dict[str, dict[str, float]]:
    table: dict[str, dict[str, float]] = {}
    with _need(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != ("user", "metric", "value"):
            raise CascadeBridgeError(f"{path}: bad header {reader.fieldnames!r}")
        for row in reader:
            table.setdefault(row["metric"], {})[row["user"]] = float(row["value"])
    return table


def _read_topic_sim(path: Path, g: SocialGraph) -> dict[tuple[int, int], float]:
    sims = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            a, b = row["user_a"], row["user_b"]
            if a in g.index and b in g.index:
                sims[(g.index[a], g.index[b])] = float(row["similarity"])
    return sims


# -- stages ----------------------------------------------------------------


def cmd_simulate(cfg: PipelineConfig) -> str:
    sc = SynthConfig(
        n_users=cfg.n_users,
        graph_model=cfg.graph_model,
        edge_param=cfg.edge_param,
        n_messages=cfg.n_messages,
        base_activation_prob=cfg.base_activation_prob,
        bridge_users=cfg.bridge_users,
        bridge_boost=cfg.bridge_boost,
        bridge_links=cfg.bridge_links,
        swb_effect=cfg.swb_effect,
        posts_per_period=cfg.posts_per_period,
        seed=stage_seed(cfg.seed, "simulate"),
    )
    data = generate(sc)
    paths = write_dataset(data, cfg.data_dir)
    conf = Path(cfg.data_dir) / "pipeline.conf"
    conf.write_text(f"# written by simulate\nboundary = {sc.boundary}\n", encoding="utf-8")
    return (
        f"simulate: {data.graph.node_count} users, {data.graph.edge_count} edges, "
        f"{len(data.events)} events, {data.retweeted_messages} multi-retweet messages "
        f"-> {paths['edges'].parent}"
    )


def cmd_build(cfg: PipelineConfig) -> str:
    g = _load_graph(cfg)
    events = read_events_csv(_need(cfg.path("events")))
    cs, report = build_cascades(g, events, threads=cfg.threads)
    for c in cs:
        validate_tree(c, g)
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    write_cascades_jsonl(cs, g, cfg.out("cascades.jsonl"))
    stats = cascade_stats(cs)
    _write_json(
        cfg.out("build_report.json"),
        {**dataclasses.asdict(report), "mean_size": stats.mean_size},
    )
    mean = "undefined" if stats.mean_size is None else f"{stats.mean_size:.2f}"
    return f"build-cascades: {stats.count} cascades, mean size {mean}"


def cmd_score(cfg: PipelineConfig) -> str:
    g = _load_graph(cfg)
    metrics = cfg.metric_list()
    events = read_events_csv(_need(cfg.path("events")))
    cs = _load_cascades(cfg, g)
    train, test = split_cascades(cs, cfg.train_fraction, stage_seed(cfg.seed, "split"))
    _write_json(
        cfg.out("split.json"),
        {"train": [c.message_id for c in train], "test": [c.message_id for c in test],
         "train_fraction": cfg.train_fraction},
    )
    n = g.node_count
    columns: dict[str, np.ndarray] = {}
    act = activity(events, g).values
    for m in metrics:
        if m == "ubm":
            scores = ubm_values(ubm(train, range(n), threads=cfg.threads))
            columns[m] = np.array([scores[u] for u in range(n)])
        elif m == "in_degree":
            columns[m] = in_degree(g).values
        elif m == "out_degree":
            columns[m] = out_degree(g).values
        elif m == "pagerank":
            v = pagerank(g, cfg.damping, cfg.pagerank_tol, cfg.pagerank_max_iter)
            if not v.converged:
                log.warning("pagerank did not converge in %d iterations", cfg.pagerank_max_iter)
            if abs(v.values.sum() - 1.0) > 1e-9:
                raise InvariantError("pagerank does not sum to 1")
            columns[m] = v.values
        elif m == "twitterrank":
            sim_path = Path(cfg.topic_sim) if cfg.topic_sim else Path(cfg.data_dir) / "topic_sim.csv"
            sims = _read_topic_sim(sim_path, g) if sim_path.is_file() else None
            v = twitterrank(g, act, sims, cfg.damping, cfg.pagerank_tol, cfg.pagerank_max_iter)
            columns[m] = v.values
        elif m == "betweenness":
            columns[m] = betweenness(g, threads=cfg.threads).values
        elif m == "community":
            columns[m] = community_centrality(g, stage_seed(cfg.seed, "community")).values
        elif m == "activity":
            columns[m] = act
    with cfg.out("scores.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("user", "metric", "value"))
        for m in metrics:
            for u in range(n):
                w.writerow((g.ids[u], m, repr(float(columns[m][u]))))
    return f"score: {len(metrics)} metrics for {n} users on {len(train)} training cascades"


def cmd_evaluate(cfg: PipelineConfig) -> str:
    table = read_scores_csv(cfg.out("scores.csv"))
    split = json.loads(_need(cfg.out("split.json")).read_text(encoding="utf-8"))
    g = _load_graph(cfg)
    cs = _load_cascades(cfg, g)
    test_ids = set(split["test"])
    test = [c for c in cs if c.message_id in test_ids]
    rows = []
    for m in [m for m in TABLE1_METRICS if m in table]:
        scores = {g.index[x]: v for x, v in table[m].items() if x in g.index}
        rows.append(evaluate(top_fraction(scores, cfg.top_fraction), test, m))
    with cfg.out("eval_report.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("metric_name", "avg_activated_per_minute", "avg_activated",
                    "pct_impacted", "pairs", "warning", "attribution"))
        for r in rows:
            w.writerow((r.metric_name, repr(r.avg_activated_per_minute), repr(r.avg_activated),
                        repr(r.pct_impacted), r.pairs, r.warning, ATTRIBUTION))
    best = max(rows, key=lambda r: r.avg_activated).metric_name if rows else "none"
    return f"evaluate: {len(rows)} metrics on {len(test)} test cascades, best avg_activated: {best}"


def cmd_swb(cfg: PipelineConfig) -> str:
    if cfg.boundary is None:
        raise ConfigError("boundary", "period boundary timestamp is required")
    table = read_scores_csv(cfg.out("scores.csv"))
    if "ubm" not in table:
        raise ConfigError("metrics", f"{cfg.out('scores.csv')} has no ubm rows")
    posts = read_posts_csv(_need(cfg.path("posts")))
    records = user_swb(posts, cfg.boundary, cfg.min_posts)
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    write_swb_csv(records, cfg.out("swb.csv"))
    top, bottom = group_swb_change(records, table["ubm"], cfg.top_fraction)
    _write_json(
        cfg.out("group_report.json"),
        {"fraction": cfg.top_fraction, "min_posts": cfg.min_posts, "boundary": cfg.boundary,
         "groups": [dataclasses.asdict(top), dataclasses.asdict(bottom)]},
    )
    return (
        f"swb: {len(records)} records, change top {top.change:+.3f} "
        f"vs bottom {bottom.change:+.3f}"
    )


def build_design(
    table: dict[str, dict[str, float]], records, columns: list[str], response: str
) -> DesignMatrix:
    swb: dict[str, dict[str, float]] = {}
    for r in records:
        swb.setdefault(r.user, {})[r.period] = r.swb
    if response == "during":
        users = sorted(u for u, d in swb.items() if DURING in d)
        y = [swb[u][DURING] for u in users]
    else:
        users = sorted(u for u, d in swb.items() if DURING in d and BEFORE in d)
        y = [swb[u][DURING] - swb[u][BEFORE] for u in users]
    for c in columns:
        if c not in table:
            raise ConfigError("stages", f"metric {c!r} missing from scores.csv")
    X = np.array([[table[c].get(u, 0.0) for c in columns] for u in users], dtype=float)
    return DesignMatrix(tuple(columns), X.reshape(len(users), len(columns)), np.array(y), tuple(users))


def cmd_regress(cfg: PipelineConfig) -> str:
    table = read_scores_csv(cfg.out("scores.csv"))
    records = read_swb_csv(_need(cfg.out("swb.csv")))
    stages = cfg.stage_list()
    columns = [c for grp in stages for c in grp]
    X = build_design(table, records, columns, cfg.response)
    screen = vif_screen(X, cfg.vif_threshold)
    kept = set(screen.kept)
    stages = [[c for c in grp if c in kept] for grp in stages]
    for k, grp in enumerate(stages, start=1):
        if not grp:
            raise ConfigError("stages", f"stage {k} lost all its columns to VIF screening")
    results = hierarchical_regression(X.select(screen.kept), stages)
    _write_json(cfg.out("regress_report.json"), report_json(results, X.n, cfg.response, screen))
    last = results[-1]
    dropped = ",".join(c for c, _ in screen.dropped) or "none"
    return (
        f"regress: n={X.n}, dropped {dropped}, final R2={last.R2:.3f}, "
        f"last stage dR2={last.delta_R2:.3f}"
    )


COMMANDS = {
    "simulate": cmd_simulate,
    "build-cascades": cmd_build,
    "score": cmd_score,
    "evaluate": cmd_evaluate,
    "swb": cmd_swb,
    "regress": cmd_regress,
}
PIPELINE = ("build-cascades", "score", "evaluate", "swb", "regress")


# -- argument parsing ------------------------------------------------------


def _shared_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS, help="key=value config file")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        p.add_argument(flag, dest=f.name, default=argparse.SUPPRESS, metavar=f.name.upper(),
                       help=f"(default: {f.default})")
    return p


def make_parser() -> argparse.ArgumentParser:
    shared = _shared_options()
    parser = argparse.ArgumentParser(
        prog="cascadebridge",
        description="Cascade reconstruction, bridging scores, SWB and regression pipeline.",
        parents=[shared],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    helps = {
        "simulate": "generate a synthetic dataset into the data directory",
        "build-cascades": "reconstruct cascade trees from edges and events",
        "score": "compute UBM and baseline scores",
        "evaluate": "compare top-ranked users on held-out cascades",
        "swb": "compute subjective well-being and group changes",
        "regress": "hierarchical regression of SWB on the scores",
        "pipeline": "run build-cascades, score, evaluate, swb and regress",
    }
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[shared], help=helps[name])
    return parser


def resolve_config(ns: argparse.Namespace) -> PipelineConfig:
    flags = {k: v for k, v in vars(ns).items() if k in _FIELD_TYPES}
    flags = {k: _coerce(k, v) if isinstance(v, str) else v for k, v in flags.items()}
    explicit: dict[str, object] = {}
    if "config" in ns:
        path = Path(ns.config)
        if not path.is_file():
            raise MissingInput(path)
        explicit = read_config_file(path)
    data_dir = flags.get("data_dir", explicit.get("data_dir", PipelineConfig.data_dir))
    merged: dict[str, object] = {}
    data_conf = Path(str(data_dir)) / "pipeline.conf"
    if data_conf.is_file():
        merged.update(read_config_file(data_conf))
    merged.update(explicit)
    merged.update(flags)
    cfg = PipelineConfig(**merged)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(ns)
        steps = PIPELINE if ns.command == "pipeline" else (ns.command,)
        for step in steps:
            print(COMMANDS[step](cfg))
    except (MissingInput, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except (CascadeBridgeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
