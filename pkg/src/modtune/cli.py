"""Command line interface: ``modtune {detect,compare,ensemble,oracle}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import FIXTURES, __version__, load_fixture
from .detector import DEFAULT_SEED, DetectConfig, detect_best
from .ensemble import (GenerationError, run_paired_ensembles, write_histogram_csv,
                       write_qdist_csv, write_summary_json)
from .graph import EdgeListError, read_edge_list, write_partition_csv
from .oracle import OracleTooLarge, exact_max

EXIT_PARSE = 2
EXIT_USAGE = 3
EXIT_GENERATION = 4
EXIT_ORACLE_LIMIT = 5

logger = logging.getLogger("modtune")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _q_value(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"q must be at least 2, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _add_detect_flags(p, final_tune=True):
    p.add_argument("--q", type=_q_value, default=2)
    if final_tune:
        p.add_argument("--final-tune", action=argparse.BooleanOptionalAction, default=True)
    targets = p.add_mutually_exclusive_group()
    targets.add_argument("--neighbor-only", dest="neighbor_only", action="store_true",
                         default=True)
    targets.add_argument("--all-targets", dest="neighbor_only", action="store_false")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modtune", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    timing = _Parser(add_help=False)
    timing.add_argument("--timing", action="store_true",
                        help="record wall time in the summary (varies between runs)")

    p = sub.add_parser("detect", parents=[timing], help="detect communities in an edge-list file")
    p.add_argument("--input", required=True)
    _add_detect_flags(p)
    p.add_argument("--restarts", type=_positive_int, default=1)
    p.add_argument("--out", default="partition.csv")
    p.add_argument("--summary", default="summary.json")

    p = sub.add_parser("compare", parents=[timing], help="modularity with and without final-tuning")
    p.add_argument("--input", required=True)
    _add_detect_flags(p, final_tune=False)
    p.add_argument("--restarts", type=_positive_int, default=1)
    p.add_argument("--summary", default=None)

    p = sub.add_parser("ensemble", parents=[timing], help="run detection on random connected ER networks")
    p.add_argument("--count", type=_positive_int, required=True)
    p.add_argument("--nodes", type=_positive_int, required=True)
    p.add_argument("--avg-degree", type=_positive_float, required=True)
    p.add_argument("--model", choices=["gnp", "gnm"], default="gnp")
    _add_detect_flags(p)
    p.add_argument("--max-attempts", type=_positive_int, default=100_000)
    p.add_argument("--hist-out", default="hist.csv")
    p.add_argument("--qdist-out", default="qdist.csv")
    p.add_argument("--summary", default="summary.json")

    p = sub.add_parser("oracle", parents=[timing], help="exact maximum modularity of a tiny graph")
    p.add_argument("--input", required=True)
    p.add_argument("--max-nodes", type=_positive_int, default=12)
    p.add_argument("--out", default="oracle_partition.csv")
    p.add_argument("--summary", default=None)
    return parser


def _config(args, **overrides) -> DetectConfig:
    fields = dict(q=args.q, neighbor_only=args.neighbor_only, seed=args.seed,
                  restarts=getattr(args, "restarts", 1),
                  final_tuning=getattr(args, "final_tune", True))
    fields.update(overrides)
    return DetectConfig(**fields)


def _load(path):
    """Read an edge list; bare names of bundled fixtures are accepted too."""
    if not os.path.exists(path) and path in FIXTURES:
        return load_fixture(path)
    return read_edge_list(path)


def _timing(args, elapsed):
    # wall time is opt-in so that summaries stay a function of the flags
    return elapsed if args.timing else None


def _config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items())
            if k not in ("command", "verbose", "timing")}


def cmd_detect(args) -> int:
    g = _load(args.input)
    cfg = _config(args)
    t0 = time.perf_counter()
    result = detect_best(g, cfg, n_jobs=args.threads)
    elapsed = time.perf_counter() - t0
    p = result.partition
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_partition_csv(g, p, fh)
    summary = {
        "command": "detect",
        "config": _config_echo(args),
        "modularity": result.modularity,
        "community_count": p.community_count,
        "community_sizes": sorted(p.community_sizes.tolist(), reverse=True),
        "rounds": result.rounds,
        "q_trace": result.q_trace,
        "seed": result.seed,
        "wall_time": _timing(args, elapsed),
        "warnings": {"duplicate_edges": g.duplicate_edges,
                     "nonconverged_eigenvectors": result.nonconverged},
    }
    with open(args.summary, "w", encoding="utf-8") as fh:
        write_summary_json(summary, fh)
    print(f"Q = {result.modularity:.10f}  communities = {p.community_count}  "
          f"({elapsed:.2f} s)")
    return 0


def cmd_compare(args) -> int:
    g = _load(args.input)
    t0 = time.perf_counter()
    rows, nonconverged = {}, 0
    for label, ft in (("bisection", False), ("final_tuning", True)):
        res = detect_best(g, _config(args, final_tuning=ft), n_jobs=args.threads)
        nonconverged += res.nonconverged
        rows[label] = {"modularity": res.modularity,
                       "community_count": res.partition.community_count,
                       "community_sizes": sorted(res.partition.community_sizes.tolist(),
                                                 reverse=True)}
        print(f"{label:>13}: Q = {res.modularity:.10f}  "
              f"communities = {res.partition.community_count}")
    gain = rows["final_tuning"]["modularity"] - rows["bisection"]["modularity"]
    print(f"{'gain':>13}: {gain:+.10f}")
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            write_summary_json({
                "command": "compare", "config": _config_echo(args), **rows, "gain": gain,
                "seed": args.seed, "wall_time": _timing(args, time.perf_counter() - t0),
                "warnings": {"duplicate_edges": g.duplicate_edges,
                             "nonconverged_eigenvectors": nonconverged}}, fh)
    return 0


def cmd_ensemble(args) -> int:
    if args.nodes < 2 or args.avg_degree > args.nodes - 1:
        raise _UsageError("need --nodes >= 2 and --avg-degree <= nodes - 1")
    t0 = time.perf_counter()
    try:
        stats, = run_paired_ensembles(args.count, args.nodes, args.avg_degree, [_config(args)],
                                      seed=args.seed, n_jobs=args.threads, model=args.model,
                                      max_attempts=args.max_attempts)
    except GenerationError as exc:
        print(f"modtune: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    with open(args.hist_out, "w", encoding="utf-8", newline="") as fh:
        write_histogram_csv(stats, fh)
    with open(args.qdist_out, "w", encoding="utf-8", newline="") as fh:
        write_qdist_csv(stats, fh)
    summary = {
        "command": "ensemble", "config": _config_echo(args), **stats.summary(),
        "mean_degree": 2 * sum(stats.edge_counts) / (args.nodes * stats.sample_count),
        "seed": args.seed, "wall_time": _timing(args, time.perf_counter() - t0),
    }
    with open(args.summary, "w", encoding="utf-8") as fh:
        write_summary_json(summary, fh)
    print(f"{stats.sample_count} networks: mean Q = {stats.mean_q:.6f}, "
          f"stddev = {stats.stddev_q:.6f}")
    return 0


def cmd_oracle(args) -> int:
    g = _load(args.input)
    t0 = time.perf_counter()
    try:
        res = exact_max(g, node_limit=args.max_nodes)
    except OracleTooLarge as exc:
        print(f"modtune: {exc}", file=sys.stderr)
        return EXIT_ORACLE_LIMIT
    p = res.best_partition
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        write_partition_csv(g, p, fh)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as fh:
            write_summary_json({
                "command": "oracle", "config": _config_echo(args),
                "modularity": res.best_q, "community_count": p.community_count,
                "community_sizes": sorted(p.community_sizes.tolist(), reverse=True),
                "partitions_examined": res.partitions_examined, "seed": None,
                "wall_time": _timing(args, time.perf_counter() - t0),
                "warnings": {"duplicate_edges": g.duplicate_edges}}, fh)
    print(f"Q_max = {res.best_q!r}  communities = {p.community_count}  "
          f"(partitions examined: {res.partitions_examined})")
    return 0


class _UsageError(Exception):
    pass


COMMANDS = {"detect": cmd_detect, "compare": cmd_compare,
            "ensemble": cmd_ensemble, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except EdgeListError as exc:
        print(f"modtune: {args.input}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"modtune: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _UsageError as exc:
        print(f"modtune: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
