"""Command-line entry point ``fglab``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional, Sequence

from .checks import (
    LAWS,
    PROFILES,
    REGISTRY,
    CheckReport,
    ConfigError,
    exit_code,
    make_config,
    overall_status,
    resolve_jobs,
    run_all,
    run_check,
)


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--order", type=int, default=d(None), help="main truncation order of the check")
    p.add_argument("--prime", type=int, action="append", default=d(None), help="prime to probe (repeatable)")
    p.add_argument("--seed", type=int, default=d(0), help="random seed")
    p.add_argument("--tol", type=float, default=d(None), help="numeric tolerance")
    p.add_argument("--jobs", type=int, default=d(None), help="parallel workers (fallback: FGLAB_JOBS)")
    p.add_argument("--json", metavar="PATH", default=d(None), help="write the JSON report to PATH")
    p.add_argument("--strict", action="store_true", default=d(False), help="exit 3 if any check is inconclusive")
    p.add_argument("--timings", action="store_true", default=d(False), help="include elapsed seconds in reports")


def _mu(text: str) -> List:
    from gmpy2 import mpq

    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("--mu takes five comma-separated values mu1,mu2,mu3,mu4,mu6")
    try:
        return [mpq(s) for s in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rational in --mu {text!r}")


def _n_range(text: str):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    n = int(text)
    return n, n


def _complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="fglab", description="Formal group law verification toolkit.")
    _global_flags(top, suppress=False)
    sub = top.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    p = add("curve", "formal group law of a Weierstrass curve")
    p.add_argument("--mu", type=_mu, help="mu1,mu2,mu3,mu4,mu6 (default: free coefficients)")
    p = add("krichever", "the elliptic formal group law")
    p.add_argument("--dump", action="store_true", help="include the series in the report")
    add("delta-check", "discriminant of the phi-curve")
    p = add("landweber", "v0, v1, v2 probes")
    p.add_argument("--budget", type=int, default=None, help="random points for the v2 scan (default: exhaustive)")
    p = add("flop", "flop difference numerator")
    p.add_argument("--fgl", choices=LAWS, default="krichever")
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--via-towers", action="store_true")
    p.add_argument("--expect", choices=("zero", "nonzero"), default=None)
    p = add("sn-flop", "s^n flop difference")
    p.add_argument("--n", type=_n_range, default=(4, 10), help="n or lo..hi")
    p.add_argument("--table", action="store_true", help="print a table")
    p = add("genus", "genera of products of projective spaces")
    p.add_argument("--todd", choices=("todd", "additive", "krichever", "universal"), default="krichever")
    p.add_argument("--dim", type=int, default=4)
    p = add("verify-k", "W-class Chern numbers and K-formulas")
    p.add_argument("--dim", type=int, default=4)
    add("verify-abcd", "elliptic genus of the W-classes")
    p = add("sigma-identity", "sigma-function identity trials")
    p.add_argument("--n", type=int, action="append", default=None, help="number of points (repeatable)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--M", type=int, default=40, help="lattice radius")
    p = add("bridge", "analytic versus algebraic characteristic series")
    p.add_argument("--z", type=_complex, default=0.3)
    p.add_argument("--tau", type=_complex, default=1j)
    p.add_argument("--k", type=_complex, default=0.1)
    p = add("run-all", "run every registered check")
    p.add_argument("--profile", choices=PROFILES, default="fast")
    p.add_argument("--only", action="append", default=None, choices=sorted(REGISTRY), help="restrict to checks")
    return top


def _overrides(args) -> dict:
    c = args.command
    if c == "curve":
        return {"mu": args.mu}
    if c == "krichever":
        return {"dump": args.dump}
    if c == "landweber":
        return {"v2_budget": args.budget}
    if c == "flop":
        return {"law": args.fgl, "degree": args.degree, "via_towers": args.via_towers, "expect": args.expect}
    if c == "sn-flop":
        return {"n_range": args.n}
    if c in ("genus", "verify-k"):
        out = {"dim": args.dim}
        if c == "genus":
            out["todd"] = args.todd
        return out
    if c == "sigma-identity":
        return {"ns": tuple(args.n) if args.n else None, "trials": args.trials, "M": args.M}
    if c == "bridge":
        return {"z": args.z, "tau": args.tau, "k": args.k}
    return {}


def _print_report(r: CheckReport, table: bool = False) -> None:
    print(f"{r.check}: {r.status.upper()}")
    if table and r.check == "sn-flop":
        print(f"{'n':>3} {'engine':>8} {'formula':>8} match")
        for row in r.details["table"]:
            print(f"{row['n']:>3} {row['engine']:>8} {row['formula']:>8} {row['match']}")
    if r.witness is not None and r.status != "pass":
        print(f"  witness: {json.dumps(r.witness)[:400]}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        jobs = resolve_jobs(args.jobs)
        if args.command == "run-all":
            reports = run_all(args.profile, jobs, args.seed, args.only)
            payload = {"profile": args.profile, "status": overall_status(reports),
                       "checks": [r.to_json(args.timings) for r in reports]}
            for r in reports:
                _print_report(r)
            print(f"overall: {payload['status'].upper()}")
        else:
            cfg = make_config(args.command, "full", _overrides(args), args.seed, args.tol, args.prime, args.order)
            reports = [run_check(cfg)]
            payload = reports[0].to_json(args.timings)
            _print_report(reports[0], getattr(args, "table", False))
    except ConfigError as e:
        print(f"fglab: configuration error: {e}", file=sys.stderr)
        return 2
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return exit_code(reports, args.strict)


if __name__ == "__main__":
    sys.exit(main())
