"""Command line entry point: ``mlinbound <experiment> --config <path>``.

Exit status: 0 when every check passes, 1 when a check fails, 2 for a
bad invocation or config.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .harness import EXPERIMENTS, ConfigError, emit, load_config, run

WORKERS_ENV = "MLINBOUND_WORKERS"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlinbound", description="Run one named experiment.")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--config", required=True, help="flat key = value config file")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", help="output directory (default: config 'out' or ./results)")
    p.add_argument("--workers", type=int, help=f"thread count (fallback: ${WORKERS_ENV}, then 1)")
    return p


def _workers(arg: int | None) -> int:
    if arg is not None:
        value = arg
    else:
        raw = os.environ.get(WORKERS_ENV, "1")
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ConfigError("workers must be >= 1")
    return value


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = load_config(args.config, args.experiment)
        if args.seed is not None:
            cfg = cfg.with_values(seed=args.seed)
        workers = _workers(args.workers)
    except (ConfigError, OSError) as exc:
        print(f"mlinbound: config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or cfg.get("out") or "results")
    try:
        result = run(cfg, workers)
    except ValueError as exc:
        print(f"mlinbound: invalid parameters: {exc}", file=sys.stderr)
        return 2
    emit(result, out)
    for c in result.checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"{mark} {c.name}: {c.measured:.6g} {c.relation} {c.threshold:.6g}")
    print(f"{result.experiment}: {'pass' if result.passed else 'fail'} "
          f"({result.wall_clock:.1f} s, seed {result.seed}) -> {out}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
