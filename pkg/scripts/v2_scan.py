"""Scan V(v1) minus V(delta) over GF(l^k) and count points with v2 != 0.

Usage: python3 scripts/v2_scan.py [--l 3] [--k 2] [--budget N] [--seed S]
"""

import argparse
import json

from fglab.landweber import supersingular_probe, v2_unit_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--l", type=int, default=3)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--budget", type=int, default=None, help="random points (default: exhaustive)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    v1 = supersingular_probe(args.l)
    print(f"v1 mod {args.l}: {v1.details.get('v1')}  ({v1.status})")
    r = v2_unit_probe(args.l, args.budget, args.seed, args.k)
    print(json.dumps(r.to_json(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
