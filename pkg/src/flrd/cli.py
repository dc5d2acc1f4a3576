"""Command-line entry point.

Exit status: 0 when every verdict passes, 1 when any verdict fails or a run
errors, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, FlrdError, ModelValidationError
from .harness import load_config, run

COMMANDS = ("simulate", "estimate", "bias-decay", "cov-tail", "mc-consistency")


def build_parser():
    parser = argparse.ArgumentParser(prog="flrd", description="LRD functional time series experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides config)")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
        p.add_argument("--format", choices=("csv", "jsonl"), default=None, help="table format")
        p.add_argument("--force", action="store_true", help="overwrite output written by another config")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command.replace("-", "_"), seed=args.seed, out=args.out,
                          threads=args.threads, fmt=args.format)
        rep = run(cfg, force=args.force)
    except (ConfigError, ModelValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FlrdError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    summary = rep.extra.get("summary")
    if summary:
        print(" ".join(f"{k}={v}" for k, v in summary.items()))
    if "estimate" in rep.extra:
        e = rep.extra["estimate"]
        print(f"theta_hat={json.dumps(e['theta_hat'])} objective={e['objective']:.6g}")
    for row in rep.metrics if args.command in ("bias-decay", "mc-consistency") else []:
        print(json.dumps(row, sort_keys=True))
    for v in rep.verdicts:
        state = {True: "PASS", False: "FAIL", None: "N/A"}[v["passed"]]
        print(f"[{state}] {v['criterion']}: {v['detail']}")
    print(f"config_hash={cfg.hash}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
