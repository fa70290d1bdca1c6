"""Command line: run a suite, emit plot tables, list suites."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import SUITES, ConfigError, load_config
from .records import PLOT_KINDS, emit_plot_data, read_record

OUT_ENV = "GAUSSWEYL_OUT"
EXIT_CONFIG = 3

log = logging.getLogger("gaussweyl")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaussweyl", description="Bound-verification suites for the Weyl calculus.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one suite from a YAML config")
    run.add_argument("suite", choices=SUITES)
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
    plot = sub.add_parser("plot-data", help="write a long-format CSV table from a result record")
    plot.add_argument("record")
    plot.add_argument("--kind", required=True)
    plot.add_argument("--out", help="CSV path (default: next to the record)")
    sub.add_parser("list-suites", help="print the suite names")
    return p


def _run(args) -> int:
    from .suites import run_suite

    try:
        cfg = load_config(args.config, suite=args.suite, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output_dir or os.environ.get(OUT_ENV) or "results"
    record = run_suite(cfg)
    js, table = record.write(out)
    counts = record.counts()
    print(f"{cfg.suite}: {counts['pass']} pass, {counts['fail']} fail, {counts['inconclusive']} inconclusive, "
          f"{counts['info']} info ({record.wall_time:.1f}s)")
    for c in record.checks:
        if c.status in ("fail", "inconclusive"):
            print(f"  {c.status.upper():12s} {c.id}: measured {c.measured:.4g} bound {c.bound:.4g}")
    print(f"wrote {js} and {table}")
    return record.exit_code


def _plot(args) -> int:
    if args.kind not in PLOT_KINDS:
        print(f"unknown kind {args.kind!r}; expected one of {', '.join(PLOT_KINDS)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        record = read_record(args.record)
    except (OSError, ValueError) as exc:
        print(f"cannot read record: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    path = Path(args.out) if args.out else Path(args.record).with_name(f"{record['suite']}-{args.kind}.csv")
    emit_plot_data(record, args.kind, path)
    print(path)
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "list-suites":
        print("\n".join(SUITES))
        return 0
    if args.command == "plot-data":
        return _plot(args)
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
