"""Fraction of paths that have returned to the origin, as a function of the horizon.

    python3 scripts/recurrence_scan.py --p 0.75 --alpha 1 --beta 0
"""
import argparse

from protorwalk.params import WalkParams
from protorwalk.stats import recurrence_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.75)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=0.0)
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--horizons", type=int, nargs="+", default=[10**3, 10**4, 10**5])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = WalkParams(args.p, args.alpha, args.beta)
    print("n          returned  mean_returns  max M/n   max |m|/n")
    for n in args.horizons:
        r = recurrence_report(params, n, args.paths, args.seed)
        print(f"{n:<10} {r.returned_fraction:<9.4f} {r.mean_return_count:<13.1f} "
              f"{r.max_ratio:<9.4f} {r.min_ratio:.4f}")


if __name__ == "__main__":
    main()
