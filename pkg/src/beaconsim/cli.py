"""Command-line entry point: ``beaconsim run <config> [--out csv] [--trace-dir dir] ...``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .scenario import ConfigError, RunFailed, load_config, rows_to_csv, run_matrix, with_seeds


def _seed_list(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers: {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beaconsim",
                                     description="Beacon-enabled 802.15.4 star network simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario sweep and write CSV results")
    run.add_argument("config", help="scenario file of key = value lines")
    run.add_argument("--out", help="CSV output path (default: stdout)")
    run.add_argument("--trace-dir", help="write one trace file per run into this directory"
                     " (default ./traces when the config sets trace = true)")
    run.add_argument("--seeds", type=_seed_list, help="override the seed list, e.g. 1,2,3")
    run.add_argument("--quiet", action="store_true", help="suppress progress messages")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.seeds:
        cfg = with_seeds(cfg, args.seeds)

    def progress(result):
        if not args.quiet:
            r = result.report
            print(f"bo={r.bo} so={r.so} n={r.n_nodes} seed={r.seed}: S={r.S:.4f} kbps"
                  f" Pd={r.Pd} C={r.C}", file=sys.stderr)

    try:
        trace_dir = args.trace_dir or ("traces" if cfg.trace else None)
        rows, _ = run_matrix(cfg, trace_dir=trace_dir, progress=progress)
    except RunFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
