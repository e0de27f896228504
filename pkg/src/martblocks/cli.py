"""Command line entry point: ``martblocks run | decompose | lp``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .atoms import decompose_H1_to_blocks
from .exceptions import DomainError, MartblocksError
from .experiments import KINDS, ExperimentSpec, emit_report, run_experiment
from .lp import atb_norm_lp
from .probability import load_instance


def _parse_p(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return np.inf
    value = float(text)
    if value <= 1:
        raise argparse.ArgumentTypeError("p must exceed 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="martblocks",
        description="Martingale Hardy/BMO norms and atomic-block certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a randomized property experiment")
    run.add_argument("--kind", choices=KINDS, required=True)
    run.add_argument("--trials", type=int, default=100)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--points", type=int, default=16)
    run.add_argument("--depth", type=int, default=4)
    run.add_argument("--dim", type=int, default=4)
    run.add_argument("--p", type=_parse_p, default=None)
    run.add_argument("--out", default=None, help="report file (stdout if omitted)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")

    dec = sub.add_parser("decompose", help="certified atomic-block decomposition")
    dec.add_argument("--input", required=True, help="instance JSON with values")
    dec.add_argument("--p", type=_parse_p, default=np.inf)
    dec.add_argument("--route", choices=("best", "davis", "atomic", "direct"),
                     default="best")
    dec.add_argument("--out", default=None)

    lp = sub.add_parser("lp", help="exact p = inf gauge on at most 8 points")
    lp.add_argument("--input", required=True)
    return parser


def _cmd_run(args) -> int:
    spec = ExperimentSpec(args.kind, args.trials, args.seed, args.points,
                          args.depth, args.dim, args.p)
    rows, summary = run_experiment(spec)
    text = emit_report(rows, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    print(json.dumps(summary), file=sys.stderr)
    return 0 if summary["passes"] == summary["trials"] else 1


def _load_values(path):
    F, f = load_instance(path)
    if f is None:
        raise DomainError("the instance has no 'values' entry")
    return F, f


def _cmd_decompose(args) -> int:
    F, f = _load_values(args.input)
    report = decompose_H1_to_blocks(f, F, args.p, args.route)
    text = json.dumps(report.to_dict(F), indent=1) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(json.dumps({"cost": report.cost, "route": report.route,
                      "blocks": len(report.blocks)}), file=sys.stderr)
    return 0


def _cmd_lp(args) -> int:
    F, f = _load_values(args.input)
    print(json.dumps({"value": atb_norm_lp(f, F)}))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "decompose": _cmd_decompose, "lp": _cmd_lp}
    try:
        return handlers[args.command](args)
    except (MartblocksError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"martblocks: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
