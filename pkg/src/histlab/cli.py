"""``histlab`` command line.

Exit codes: 0 success, 1 a check, expectation or analysis failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .reproduce import CHECKS, reproduce_paper
from .scenario import (
    ScenarioError,
    lg_rows_to_csv,
    parse_scenario,
    run_scenario,
)
from .qcore import Z
from .tempcorr import lg_sweep

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        out.write_text(text, encoding="utf-8")


def _scenario_args(p: argparse.ArgumentParser):
    p.add_argument("--scenario", type=Path, required=True, help="scenario JSON file")
    p.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--tolerance", type=float, default=None, help="override the scenario tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="histlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)

    run = sub.add_parser("run", help="run every analysis requested by a scenario")
    _scenario_args(run)

    single = {
        "history": ("build", "history"),
        "monitor": ("run", "monitor"),
        "channel": ("history", "channel"),
        "pointer": ("run", "pointer"),
        "uncertainty": ("report", "uncertainty"),
    }
    for group, (action, analysis) in single.items():
        g = sub.add_parser(group).add_subparsers(dest="action", required=True)
        p = g.add_parser(action, help=f"run the {analysis!r} analysis of a scenario")
        _scenario_args(p)
        p.set_defaults(analysis=analysis)

    lg = sub.add_parser("lg").add_subparsers(dest="action", required=True)
    sweep = lg.add_parser("sweep", help="tabulate Leggett-Garg correlators as CSV")
    sweep.add_argument("--theta-min", type=float, default=0.0)
    sweep.add_argument("--theta-max", type=float, default=float(np.pi))
    sweep.add_argument("--steps", type=int, default=181)
    sweep.add_argument("--out", type=Path, default=None)

    rp = sub.add_parser("reproduce-paper", help="run the bundled reproduction checks")
    rp.add_argument("--only", action="append", default=None, metavar="NAME", help="run only this check (repeatable)")
    rp.add_argument("--list", action="store_true", help="list check names without running them")
    rp.add_argument("--workers", type=int, default=4)
    rp.add_argument("--out", type=Path, default=None)
    return parser


def _input_error(messages):
    payload = {"error": "input", "messages": list(messages)}
    sys.stderr.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_INPUT


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.group == "reproduce-paper":
        if args.list:
            _emit("\n".join(CHECKS), args.out)
            return EXIT_OK
        try:
            bundle = reproduce_paper(args.only, args.workers)
        except KeyError as exc:
            return _input_error([str(exc.args[0])])
        _emit(json.dumps(bundle, indent=2, sort_keys=True), args.out)
        return EXIT_OK if bundle["passed"] else EXIT_FAIL

    if args.group == "lg":
        if args.steps < 1:
            return _input_error(["--steps must be at least 1"])
        rows = lg_sweep(np.linspace(args.theta_min, args.theta_max, args.steps), Z)
        _emit(lg_rows_to_csv(rows), args.out)
        return EXIT_OK

    require = [args.analysis] if args.group != "run" else None
    try:
        sc = parse_scenario(args.scenario, seed=args.seed, tolerance=args.tolerance, require=require)
    except ScenarioError as exc:
        return _input_error(exc.errors)

    if args.group == "run":
        report = run_scenario(sc)
        _emit(json.dumps(report, indent=2, sort_keys=True), args.out)
        return EXIT_OK if report["passed"] else EXIT_FAIL

    report = run_scenario(sc, only=[args.analysis])
    block = report["analyses"][args.analysis]
    _emit(json.dumps(block, indent=2, sort_keys=True), args.out)
    return EXIT_FAIL if "error" in block else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
