"""Tower-engine s^n flop differences next to the closed formula.

Usage: python3 scripts/sn_table.py [--lo 4] [--hi 12]
"""

import argparse
import time

from fglab.towers import flop_sn_difference, flop_sn_formula


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=int, default=4)
    ap.add_argument("--hi", type=int, default=12)
    args = ap.parse_args()
    print(f"{'n':>3} {'engine':>8} {'formula':>8} {'seconds':>8}")
    for n in range(args.lo, args.hi + 1):
        t0 = time.perf_counter()
        e = flop_sn_difference(n)
        dt = time.perf_counter() - t0
        f = flop_sn_formula(n)
        flag = "" if e == f else "  MISMATCH"
        print(f"{n:>3} {int(e):>8} {int(f):>8} {dt:>8.3f}{flag}")


if __name__ == "__main__":
    main()
