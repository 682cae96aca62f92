"""Worst observed ratio |M_{j+n} - M_j| / max_k |W_{j+k} - W_j| against both bound constants.

    python3 scripts/bound_constant.py --paths 20 --steps 10000
"""
import argparse
import itertools

import numpy as np

from protorwalk.decomposition import bound_grid, decompose
from protorwalk.params import WalkParams, derive_perturbation
from protorwalk.rng import trajectory_seed
from protorwalk.walk import run_walk


def worst_ratio(params, paths, steps, seed):
    worst = 0.0
    for i in range(paths):
        traj = run_walk(params, steps + 1, trajectory_seed(seed, i))
        W = decompose(traj).W
        M, m = traj.running_max, traj.running_min
        for j, n in bound_grid(steps):
            w = np.max(np.abs(W[j:j + n + 1] - W[j]))
            if w > 0:
                worst = max(worst, abs(M[j + n] - M[j]) / w, abs(m[j + n] - m[j]) / w)
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20)
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print("p     alpha beta   a        b        ratio   C        C'")
    for p, al, be in itertools.product((0.1, 0.25, 0.75, 0.9), (0.0, 0.5, 1.0), (0.0, 0.5, 1.0)):
        params = WalkParams(p, al, be)
        pert = derive_perturbation(params)
        r = worst_ratio(params, args.paths, args.steps, args.seed)
        flag = "  <- exceeds C" if r > pert.bound_constant + 1e-9 else ""
        print(f"{p:<5} {al:<5} {be:<6} {pert.a:<8.3f} {pert.b:<8.3f} {r:<7.3f} "
              f"{pert.bound_constant:<8.3f} {pert.corrected_bound_constant:.3f}{flag}")


if __name__ == "__main__":
    main()
