"""Command-line interface.

Exit codes: 0 success, 1 data error, 2 usage or config error. Data goes to
stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .baselines import DEFAULT_SEGMENTS, combmnz
from .corpus_io import ParseError, query_sort_key, read_qrels, read_run_file, write_run_file
from .experiments import ConfigError, fuse_split, load_config, run_experiment, split_queries, training_size_sweep
from .metrics import MEASURES, evaluate_run
from .profiles import build_profile, emit_probability_curve, format_curve
from .sliding import DEFAULT_W

ALGORITHM_NAMES = {"slidefuse": "SlideFuse", "combmnz": "CombMNZ", "probfuse": "ProbFuse", "segfuse": "SegFuse"}
DEFAULT_TRAIN_FRACTION = 0.10


class UsageError(Exception):
    pass


def _warn(msg: str) -> None:
    print(f"slidefuse: {msg}", file=sys.stderr)


def _fraction(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must be in (0, 1), got {text}")
    return value


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def cmd_fuse(args: argparse.Namespace) -> int:
    algorithm = ALGORITHM_NAMES[args.algorithm]
    runs = [read_run_file(p) for p in args.runs]
    queries = sorted({q for r in runs for q in r.lists}, key=query_sort_key)
    tag = args.tag or args.algorithm

    if algorithm == "CombMNZ":
        given = [f for f in ("w", "segments", "train_fraction", "seed") if getattr(args, f) is not None]
        ignored = ["--" + f.replace("_", "-") for f in given] + (["--qrels"] if args.qrels else [])
        if ignored:
            _warn("combmnz uses no training; ignoring " + ", ".join(ignored))
        fused = {q: combmnz([r.lists[q] for r in runs if q in r.lists]) for q in queries}
    else:
        if not args.qrels:
            raise UsageError(f"--qrels is required for {args.algorithm}")
        qrels = read_qrels(args.qrels)
        fraction = args.train_fraction if args.train_fraction is not None else DEFAULT_TRAIN_FRACTION
        training, test = split_queries(queries, fraction, args.seed or 0, 0)
        _warn(f"trained on {len(training)} queries, fusing {len(test)}")
        fused = fuse_split(
            runs,
            qrels,
            training,
            test,
            w=DEFAULT_W if args.w is None else args.w,
            segments=DEFAULT_SEGMENTS if args.segments is None else args.segments,
            algorithms=(algorithm,),
        )[algorithm]
    sys.stdout.write(write_run_file(fused, tag).decode("utf-8"))
    sys.stdout.flush()
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    run = read_run_file(args.run)
    qrels = read_qrels(args.qrels)
    scores = evaluate_run(run.lists, qrels)
    lines = ["\t".join(["query", *MEASURES])]
    if args.per_query:
        for q in scores["map"].per_query:
            lines.append("\t".join([q, *(f"{scores[m].per_query[q]:.4f}" for m in MEASURES)]))
    lines.append("\t".join(["all", *(f"{scores[m].mean:.4f}" for m in MEASURES)]))
    print("\n".join(lines))
    return 0


def _print_report(report, fmt: str) -> None:
    sys.stdout.write(report.format_tsv() if fmt == "tsv" else report.format_text())
    sys.stdout.flush()


def cmd_experiment(args: argparse.Namespace) -> int:
    _print_report(run_experiment(load_config(args.config)), args.format)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    _print_report(training_size_sweep(config, args.fractions, args.measure), args.format)
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    qrels = read_qrels(args.qrels)
    multi = len(args.runs) > 1
    out = ["system\tposition\tprobability\n"] if multi else []
    for path in args.runs:
        run = read_run_file(path)
        queries = run.query_ids
        if args.train_fraction is not None:
            queries, _ = split_queries(queries, args.train_fraction, args.seed, 0)
        if not queries:
            raise ValueError(f"{path}: run has no queries")
        rows = emit_probability_curve(build_profile(run, queries, qrels), args.w)
        if multi:
            out.extend(f"{run.system_tag}\t{p}\t{v:.6f}\n" for p, v in rows)
        else:
            out.append(format_curve(rows))
    sys.stdout.write("".join(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slidefuse", description="Probabilistic rank fusion and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse TREC run files and write a fused run to stdout")
    p.add_argument("runs", nargs="+", help="input TREC run files, one per system")
    p.add_argument("--algorithm", "-a", choices=sorted(ALGORITHM_NAMES), default="slidefuse")
    p.add_argument("--qrels", help="relevance judgments used for training")
    p.add_argument("--w", type=_nonneg, default=None, help=f"window half-width (default {DEFAULT_W})")
    p.add_argument("--segments", type=_positive, default=None, help=f"ProbFuse segments (default {DEFAULT_SEGMENTS})")
    p.add_argument("--train-fraction", type=_fraction, default=None, help="share of queries used for training (default 0.10)")
    p.add_argument("--seed", type=_nonneg, default=None, help="shuffle seed for the training split (default 0)")
    p.add_argument("--tag", help="run tag for the output (default: algorithm name)")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", help="MAP, bpref and P10 of a run")
    p.add_argument("run")
    p.add_argument("qrels")
    p.add_argument("--per-query", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    for name, func, helptext in (
        ("experiment", cmd_experiment, "compare all four algorithms over shuffled splits"),
        ("sweep", cmd_sweep, "coefficient of variation across training-set sizes"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", help="TOML experiment config")
        p.add_argument("--format", choices=("text", "tsv"), default="text")
        if name == "sweep":
            p.add_argument("--fractions", type=_fraction, nargs="+", default=None)
            p.add_argument("--measure", choices=MEASURES, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("curve", help="per-position relevance probability of each run")
    p.add_argument("runs", nargs="+")
    p.add_argument("--qrels", required=True)
    p.add_argument("--w", type=_nonneg, default=None, help="smooth with this window half-width")
    p.add_argument("--train-fraction", type=_fraction, default=None, help="train on a shuffled share of queries instead of all")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except ConfigError as exc:
        _warn(f"config error: {exc}")
        return 2
    except (ParseError, OSError, ValueError) as exc:
        _warn(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
