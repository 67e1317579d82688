"""Command line front end: ``flatmu solve|check|fuzz``.

Exit codes: 0 ok, 1 mismatch or verification failure, 2 usage or parse
error, 3 resource exhaustion (some verdict UNKNOWN).
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .formula import DefinitionError, Signature
from .harness import EXHAUSTED, USAGE, FuzzConfig, Report, cross_check, fuzz, run
from .oracle import OracleBounds
from .parser import ParseError
from .problem import load_problem
from .tableau import SolverConfig


def _per_query(path: str, name: str, count: int) -> str:
    if count == 1:
        return path
    stem, ext = os.path.splitext(path)
    return f"{stem}.{name}{ext}"


def _write_outputs(rep: Report, args) -> None:
    n = len(rep.results)
    out_dir = getattr(args, "save_counterexamples", None)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        for name, text in rep.counterexamples:
            with open(os.path.join(out_dir, f"{name}.prob"), "w", encoding="utf-8") as fh:
                fh.write(text)
    for r in rep.results:
        if args.dump_tableau and r.verdict.tableau is not None:
            with open(_per_query(args.dump_tableau, r.name, n), "w", encoding="utf-8") as fh:
                fh.write(r.verdict.tableau.to_dot(r.verdict.alive))
        if args.emit_model and r.verdict.model is not None and r.status == "SAT":
            with open(_per_query(args.emit_model, r.name, n), "w", encoding="utf-8") as fh:
                fh.write(r.verdict.model.to_json() + "\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flatmu", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--logic", default=None, help="k | kn:<agents> | graded")
    common.add_argument("--timeout-cap", type=int, default=None,
                        help="largest time-out budget to try (default 2^|FL|)")
    common.add_argument("--node-cap", type=int, default=200_000)
    common.add_argument("--oracle-states", type=int, default=4)
    common.add_argument("--oracle-mult", type=int, default=3)
    common.add_argument("--dump-tableau", metavar="PATH", help="write the tableau as DOT")
    common.add_argument("--emit-model", metavar="PATH", help="write SAT models as JSON")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="print wall times")
    common.add_argument("--no-stats", action="store_true", help="omit statistics blocks")
    sub = ap.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("solve", parents=[common], help="solve every query in a problem file")
    sp.add_argument("problem")
    sp = sub.add_parser("check", parents=[common], help="solve and cross-check with the oracle")
    sp.add_argument("problem")
    sp = sub.add_parser("fuzz", parents=[common], help="cross-check random formulas")
    sp.add_argument("--cases", type=int, default=100)
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--max-fl", type=int, default=10)
    sp.add_argument("--save-counterexamples", metavar="DIR",
                    help="write each minimized counterexample as DIR/<case>.prob")
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else 0
    config = SolverConfig(timeout_cap=args.timeout_cap, node_cap=args.node_cap)
    bounds = OracleBounds(max_states=args.oracle_states, max_multiplicity=args.oracle_mult)
    try:
        sig = Signature.from_flag(args.logic) if args.logic else None
        if args.command == "fuzz":
            fc = FuzzConfig(seed=args.seed, cases=args.cases, logic=args.logic or "k",
                            depth=args.depth, max_fl=args.max_fl)
            rep = fuzz(fc, config, bounds, timing=args.timing)
        else:
            prob = load_problem(args.problem, sig)
            if args.command == "solve":
                rep = run(prob, config, timing=args.timing)
            else:
                rep = cross_check(prob, config, bounds, timing=args.timing)
    except (ParseError, DefinitionError, ValueError, OSError) as e:
        print(f"flatmu: error: {e}", file=sys.stderr)
        return USAGE
    sys.stdout.write(rep.render(stats=not args.no_stats))
    try:
        _write_outputs(rep, args)
    except OSError as e:
        print(f"flatmu: error: {e}", file=sys.stderr)
        return USAGE
    code = rep.exit_code()
    if code == EXHAUSTED:
        print("flatmu: some verdicts are UNKNOWN (resource bound reached)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
