"""Command line interface.

    metamap run --scenario <path|builtin:name> [--eps 0.02,0.01] [--grid n]
                [--jobs k] [--out dir]
    metamap validate --scenario <path|builtin:name>
    metamap markov --eps-lr x --eps-rl y

Exit codes: 0 success, 1 fatal error, 2 completed with failed sweep rows.
"""

from __future__ import annotations

import argparse
import sys

from .map_model import validate_hypotheses
from .metastability import markov_stationary
from .runner import run_scenario
from .scenarios import ScenarioError, check_grid, load_scenario, normalize_eps


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metamap",
                                description="Metastable interval-map experiments")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario sweep and write reports")
    run_p.add_argument("--scenario", required=True,
                       help="JSON scenario path or builtin:<name>")
    run_p.add_argument("--eps", help="comma-separated eps values (override)")
    run_p.add_argument("--grid", type=int, help="grid size n (override)")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel sweep rows")
    run_p.add_argument("--out", help="output directory (override)")

    val_p = sub.add_parser("validate", help="hypothesis report only")
    val_p.add_argument("--scenario", required=True)

    mk_p = sub.add_parser("markov", help="two-state chain closed form")
    mk_p.add_argument("--eps-lr", type=float, required=True)
    mk_p.add_argument("--eps-rl", type=float, required=True)
    return p


def _apply_overrides(scn, args) -> None:
    if getattr(args, "eps", None):
        try:
            eps = [float(tok) for tok in args.eps.split(",")]
        except ValueError:
            raise ScenarioError([f"--eps: cannot parse {args.eps!r}"])
        if not eps or any(e <= 0 for e in eps):
            raise ScenarioError([f"--eps: values must be positive, got {args.eps!r}"])
        scn.eps_list = tuple(normalize_eps(eps))
    if getattr(args, "grid", None):
        scn.grid_n = args.grid
    if getattr(args, "out", None):
        scn.out_dir = args.out
    scn.warnings.clear()
    check_grid(scn)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "markov":
            alpha, rho = markov_stationary(args.eps_lr, args.eps_rl)
            print(f"alpha = {alpha!r}")
            print(f"rho = {rho!r}")
            return 0
        scn = load_scenario(args.scenario)
        if args.command == "validate":
            if scn.kind == "markov":
                print("markov scenarios have no map hypotheses to validate")
                return 0
            report = validate_hypotheses(scn.family, depth=scn.hypothesis_depth)
            print(f"min_expansion = {report.min_expansion!r}")
            print(f"distortion = {report.distortion!r}")
            print(f"I2 (depth {report.checked_depth}): {'pass' if report.passes_I2 else 'FAIL'}")
            print(f"I3: {'not checked' if report.passes_I3 is None else ('pass' if report.passes_I3 else 'FAIL')}")
            print(f"I4a: {'pass' if report.passes_I4a else 'FAIL'}")
            print(f"P2: {'pass' if report.passes_P2 else 'FAIL'}")
            for d in report.diagnostics:
                print(f"  {d}")
            return 0
        _apply_overrides(scn, args)
        return run_scenario(scn, jobs=max(args.jobs, 1))
    except ScenarioError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
