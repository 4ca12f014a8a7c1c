"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 protocol abort,
3 CSS verification failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from confqkd.codes import LIBRARY, get_code
from confqkd.config import load_config
from confqkd.css import verify_css
from confqkd.errors import ConfigError
from confqkd.protocol import Completed, run_session
from confqkd.sweep import Axis, default_jobs, rows_to_csv, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_ABORT, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="confqkd", description="Three-party BB84 conference key simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one protocol session")
    run.add_argument("--config", type=Path, help="INI session configuration")
    run.add_argument("--seed", type=_u64, help="override the configured seed")
    run.add_argument("--out", type=Path, help="write the outcome record here instead of stdout")
    run.add_argument("--transcript", type=Path, help="write the public transcript here")

    sweep = sub.add_parser("sweep", help="Monte-Carlo sweep of one parameter, CSV output")
    sweep.add_argument("--config", type=Path)
    sweep.add_argument("--seed", type=_u64, default=0)
    sweep.add_argument("--axis", required=True, help="NAME:MIN:MAX:STEPS")
    sweep.add_argument("--trials", type=_positive, default=10)
    sweep.add_argument("--jobs", type=_positive, default=None, help="worker processes (default: all CPUs)")
    sweep.add_argument("--out", type=Path)

    verify = sub.add_parser("verify-css", help="exhaustive CSS identity checks")
    verify.add_argument("--max-n", type=_positive, default=3)
    verify.add_argument("--out", type=Path)
    verify.add_argument("--fault-inject", choices=["sign"], help=argparse.SUPPRESS)

    codes = sub.add_parser("codes", help="list the code library")
    codes.add_argument("--out", type=Path)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_run(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    outcome, transcript = run_session(cfg)
    _emit(outcome.to_record() + "\n", args.out)
    if args.transcript is not None:
        args.transcript.write_text(transcript.dumps())
    if isinstance(outcome, Completed):
        return EXIT_OK
    print(f"session aborted: {outcome.reason}", file=sys.stderr)
    return EXIT_ABORT


def cmd_sweep(args) -> int:
    axis = Axis.parse(args.axis)
    base = load_config(args.config)
    rows = run_sweep(base, axis, args.trials, args.seed, args.jobs or default_jobs())
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


def cmd_verify_css(args) -> int:
    report = verify_css(args.max_n, phases=args.fault_inject != "sign")
    _emit(report.text(), args.out)
    if report.passed:
        return EXIT_OK
    for check in report.failing():
        print(f"identity {check.name} failed at {check.failures[0]}", file=sys.stderr)
    return EXIT_VERIFY


def cmd_codes(args) -> int:
    lines = ["name,n,k,rate,min_distance"]
    for name in LIBRARY:
        c = get_code(name)
        lines.append(f"{name},{c.n},{c.k},{c.rate:.6f},{c.minimum_distance()}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "verify-css": cmd_verify_css, "codes": cmd_codes}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
