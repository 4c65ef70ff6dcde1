"""Degree-by-degree flop numerator for several formal group laws.

Usage: python3 scripts/flop_degree_table.py [--degree 8] [--laws additive,krichever,universal]
"""

import argparse
import json

from fglab.checks import LAWS, flop_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=8)
    ap.add_argument("--laws", default="additive,multiplicative,krichever,weierstrass-phi,universal")
    ap.add_argument("--json", metavar="PATH")
    args = ap.parse_args()
    laws = [s for s in args.laws.split(",") if s]
    unknown = set(laws) - set(LAWS)
    if unknown:
        ap.error(f"unknown laws {sorted(unknown)}; choose from {LAWS}")
    reports = {law: flop_report(law, args.degree) for law in laws}
    print(f"{'degree':>6} " + " ".join(f"{law:>16}" for law in laws))
    for d in range(args.degree + 1):
        cells = []
        for law in laws:
            rows = reports[law]["degrees"]
            cells.append("zero" if d < len(rows) and rows[d]["numerator_zero"] else "NONZERO")
        print(f"{d:>6} " + " ".join(f"{c:>16}" for c in cells))
    for law in laws:
        r = reports[law]
        print(f"{law}: lowest nonzero numerator degree {r['lowest_nonzero_degree']}, "
              f"class series lowest nonzero degree {r['class_lowest_nonzero_degree']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=2, sort_keys=True, default=str)


if __name__ == "__main__":
    main()
