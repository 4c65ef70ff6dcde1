"""Analytic versus algebraic characteristic-series coefficients over a grid of points.

Usage: python3 scripts/bridge_residuals.py [--order 5]
"""

import argparse
import itertools

from fglab.analytic import analytic_algebraic_bridge


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=5)
    args = ap.parse_args()
    zs = [0.2, 0.3, 0.25 + 0.1j]
    taus = [1j, 0.1 + 1.2j]
    ks = [0.0, 0.1, 0.3 - 0.2j]
    print(f"{'z':>14} {'tau':>12} {'k':>12}  max residual f2..f{args.order}")
    for z, tau, k in itertools.product(zs, taus, ks):
        r = analytic_algebraic_bridge(z, tau, k, N=args.order)
        worst = max(r.residuals[2:])
        print(f"{str(z):>14} {str(tau):>12} {str(k):>12}  {worst:.2e}")


if __name__ == "__main__":
    main()
