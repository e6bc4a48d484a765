"""Command line entry point: ``concmap {bench,stress,check}``."""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .api import UsageError
from .harness.checker import check_history
from .harness.faults import FAULTS
from .harness.history import read_history, write_history
from .harness.workload import IMPLS, BenchConfig, run_bench, run_stress


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--impl", choices=sorted(IMPLS), default="lockfree")
    p.add_argument("--readers", type=int, default=1)
    p.add_argument("--writers", type=int, default=0)
    p.add_argument("--duration-secs", type=float, default=1.0)
    p.add_argument("--keyspace", type=int, default=1024)
    p.add_argument("--prefill", type=int, default=512)
    p.add_argument("--nbuckets", type=int, default=1024)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None, help="append one result row to this CSV file")
    p.add_argument(
        "--read-fraction", type=float, default=None,
        help="run every thread as a mixed worker with this share of gets",
    )


def _config(args: argparse.Namespace) -> BenchConfig:
    return BenchConfig(
        impl=args.impl, readers=args.readers, writers=args.writers,
        duration=args.duration_secs, keyspace=args.keyspace, prefill=args.prefill,
        nbuckets=args.nbuckets, seed=args.seed, csv_path=args.csv,
        read_fraction=args.read_fraction,
    )


def _print_failures(verdicts) -> int:
    bad = {k: v for k, v in verdicts.items() if not v.linearizable}
    print(f"keys checked: {len(verdicts)}  violations: {len(bad)}")
    for key, verdict in sorted(bad.items()):
        print(f"key {key}: not linearizable; minimal counterexample:")
        for rec in verdict.counterexample:
            print("  " + ",".join(rec.to_row()))
    return 1 if bad else 0


def cmd_bench(args: argparse.Namespace) -> int:
    report = run_bench(_config(args))
    for row in report.rows:
        print(
            f"{row.impl} readers={row.readers} writers={row.writers} "
            f"reads/s={row.reads_per_sec:.0f} writes/s={row.writes_per_sec:.0f} "
            f"window={row.duration_s:.3f}s seed={row.seed}"
        )
    for k, v in report.notes.items():
        print(f"{k}: {v}")
    return 0


def cmd_stress(args: argparse.Namespace) -> int:
    c = _config(args)
    wrap = FAULTS[args.fault] if args.fault else None
    result = run_stress(c, args.ops, record=args.record, wrap=wrap)
    print(f"{c.impl}: {args.ops} ops on {c.threads} threads, final size {len(result.snapshot)}")
    if not args.record:
        return 0
    if args.history_out:
        write_history(args.history_out, result.records)
    return _print_failures(check_history(result.records))


def cmd_check(args: argparse.Namespace) -> int:
    return _print_failures(check_history(read_history(args.history)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="timed throughput run")
    _common(bench)
    bench.set_defaults(func=cmd_bench)

    stress = sub.add_parser("stress", help="fixed-count run, optionally recorded and checked")
    _common(stress)
    stress.add_argument("--ops", type=int, default=10_000)
    stress.add_argument("--record", action="store_true")
    stress.add_argument("--history-out", default=None, help="write the recorded history here")
    stress.add_argument("--fault", choices=sorted(FAULTS), default=None, help=argparse.SUPPRESS)
    stress.set_defaults(func=cmd_stress)

    check = sub.add_parser("check", help="check a recorded history file")
    check.add_argument("--history", required=True)
    check.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"concmap: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"concmap: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
