"""KS distance between rescaled walk marginals and the scaling limit, over a range of n.

    python3 scripts/scaling_limit.py --p 0.75 --alpha 1 --beta 0 --samples 4000
"""
import argparse

from protorwalk.harness import limit_marginals, walk_marginals
from protorwalk.params import WalkParams
from protorwalk.stats import ks_statistic


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=0.75)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=0.0)
    ap.add_argument("--samples", type=int, default=4000)
    ap.add_argument("--steps", type=int, nargs="+", default=[1000, 4000, 16000])
    ap.add_argument("--grid-steps", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    params = WalkParams(args.p, args.alpha, args.beta)
    times = [0.5, 1.0]
    lx, ls, grid = limit_marginals(params, times, args.samples, args.seed + 1, args.grid_steps)
    print(f"limit: {'DPBM grid solver' if grid else 'exact one-sided sampler'}")
    print("n        t    D(X)     D(max)")
    for n in args.steps:
        wx, wm = walk_marginals(params, n, times, args.samples, args.seed, workers=args.workers)
        for i, t in enumerate(times):
            print(f"{n:<8} {t:<4} {ks_statistic(wx[i], lx[i]):.4f}   "
                  f"{ks_statistic(wm[i], ls[i]):.4f}")


if __name__ == "__main__":
    main()
