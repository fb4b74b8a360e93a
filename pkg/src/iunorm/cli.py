"""Command line entry point: ``iunorm <command> [options]``.

Exit status is 0 when every report row passes its check, 1 when some row
fails, and 2 on usage, configuration or input errors.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path
from typing import List, Optional

from ._parallel import default_threads
from .experiments import COMMANDS, ConfigError, RunConfig, render, run
from .norm_core import FormatError


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iunorm", description="Integral-uniform norm experiments.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--n", type=_int_list, default=[], help="order(s)/dimension(s), comma separated")
    parser.add_argument("--m", type=_int_list, default=[], help="norm parameter(s), comma separated")
    parser.add_argument("--dist", default="rademacher", help="coefficient law: rademacher or gaussian")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--net-factor", type=int, help="net points per unit of order")
    parser.add_argument("--c0", type=float, default=0.05)
    parser.add_argument("--beta", type=float, default=0.0)
    parser.add_argument("--kind", choices=["fejer", "dirichlet", "both"], default="both")
    parser.add_argument("--input", help="value,mass CSV for the norm command")
    parser.add_argument("--mc", type=int, metavar="TRIALS", help="Monte Carlo instead of exact evaluation")
    parser.add_argument("--count", type=int, default=10, help="random polynomials per n")
    parser.add_argument("--attempts", type=int, default=200)
    parser.add_argument("--refine", action="store_true", help="greedy sign-flip pass after the search")
    parser.add_argument("--delta", type=float, default=0.25)
    parser.add_argument("--config", help="JSON experiment grid (overrides flags)")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $IUNORM_THREADS or 1)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=args.command, n=args.n, m=args.m, dist=args.dist, trials=args.trials, seed=args.seed,
        net_factor=args.net_factor, c0=args.c0, beta=args.beta, kind=args.kind, input=args.input,
        mc=args.mc, count=args.count, attempts=args.attempts, refine=args.refine, delta=args.delta,
        threads=args.threads if args.threads is not None else default_threads(),
    )
    if args.config:
        cfg.update_from_json(args.config)
    return cfg


def write_atomic(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        os.unlink(tmp)
        raise


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        report = run(cfg)
        text = render(report, args.format)
    except FormatError as exc:
        print(f"iunorm: {cfg.input}: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        print(f"iunorm {args.command}: {exc}", file=sys.stderr)
        return 2
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
