"""Correlated (persistent) random walks and their interval exit times."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import stream_keys, uniform


@dataclass
class CRWPath:
    persistence: float
    seed: int
    positions: np.ndarray

    @property
    def running_max(self) -> np.ndarray:
        return np.maximum.accumulate(self.positions)

    @property
    def running_min(self) -> np.ndarray:
        return np.minimum.accumulate(self.positions)

    @property
    def displacements(self) -> np.ndarray:
        return np.diff(self.positions)


@njit(cache=True, nogil=True)
def _crw_kernel(q, n, start, p_right, key, positions, checkpoints, cp_x):
    x = start
    d = 1 if uniform(key, 0) < p_right else -1
    ci = 0
    ncp = checkpoints.shape[0]
    if positions.shape[0] > 0:
        positions[0] = x
    while ci < ncp and checkpoints[ci] == 0:
        cp_x[ci] = x
        ci += 1
    for k in range(n):
        if k > 0 and uniform(key, k) >= q:
            d = -d
        x += d
        if positions.shape[0] > 0:
            positions[k + 1] = x
        while ci < ncp and checkpoints[ci] == k + 1:
            cp_x[ci] = x
            ci += 1
    return x


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"persistence must lie in (0, 1), got {q!r}")


def simulate_crw(q: float, n_steps: int, seed: int, start: int = 0,
                 p_right: float = 0.5) -> CRWPath:
    """Nearest-neighbour walk repeating its last direction with probability ``q``.

    The first step goes right with probability ``p_right``.
    """
    _check_q(q)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    _, key = stream_keys(seed)
    pos = np.empty(n_steps + 1, dtype=np.int64)
    empty = np.empty(0, dtype=np.int64)
    _crw_kernel(q, n_steps, start, p_right, np.uint64(key), pos, empty, empty.copy())
    return CRWPath(persistence=q, seed=seed, positions=pos)


def crw_checkpoints(q: float, n_steps: int, seed: int, checkpoints, start: int = 0,
                    p_right: float = 0.5) -> np.ndarray:
    """Positions at the given step indices, without storing the path."""
    _check_q(q)
    _, key = stream_keys(seed)
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    out = np.empty(cps.size, dtype=np.int64)
    _crw_kernel(q, n_steps, start, p_right, np.uint64(key),
                np.empty(0, dtype=np.int64), cps, out)
    return out


def exit_time_exact(q: float, L: int, first_to_zero: float) -> float:
    """Expected time for a CRW started at 1 to hit {0, L}.

    The first step goes to 0 with probability ``first_to_zero``. After it,
    the walk is a Markov chain on (site, incoming direction); its expected
    absorption times solve a (2L - 2)-dimensional linear system.
    """
    _check_q(q)
    if L < 2:
        raise ValueError("L must be >= 2")
    sites = L - 1
    # State (x, d) -> index 2*(x-1) + (d > 0); x in 1..L-1.
    dim = 2 * sites
    A = np.eye(dim)
    rhs = np.ones(dim)

    def idx(x: int, d: int) -> int | None:
        if x <= 0 or x >= L:
            return None
        return 2 * (x - 1) + (1 if d > 0 else 0)

    for x in range(1, L):
        for d in (-1, 1):
            i = idx(x, d)
            for nxt, prob in ((x + d, q), (x - d, 1.0 - q)):
                j = idx(nxt, nxt - x)
                if j is not None:
                    A[i, j] -= prob
    T = np.linalg.solve(A, rhs)
    after = idx(2, 1)
    return 1.0 + (1.0 - first_to_zero) * (T[after] if after is not None else 0.0)


@njit(cache=True, nogil=True)
def _exit_time_mc(q, L, first_to_zero, key, reps, out):
    c = 0
    for r in range(reps):
        x = 1
        d = -1 if uniform(key, c) < first_to_zero else 1
        c += 1
        x += d
        t = 1
        while 0 < x < L:
            if uniform(key, c) >= q:
                d = -d
            c += 1
            x += d
            t += 1
        out[r] = t


def exit_time_monte_carlo(q: float, L: int, first_to_zero: float, reps: int,
                          seed: int) -> tuple[float, float]:
    """Sample mean of the exit time and its standard error."""
    _check_q(q)
    if L < 2:
        raise ValueError("L must be >= 2")
    _, key = stream_keys(seed)
    out = np.empty(reps, dtype=np.int64)
    _exit_time_mc(q, L, first_to_zero, np.uint64(key), reps, out)
    return float(out.mean()), float(out.std(ddof=1) / np.sqrt(reps))


def crw_exit_time(q: float, L: int, first_to_zero: float, mode: str = "exact",
                  reps: int = 10_000, seed: int = 0) -> float:
    if mode == "exact":
        return exit_time_exact(q, L, first_to_zero)
    if mode == "monte-carlo":
        return exit_time_monte_carlo(q, L, first_to_zero, reps, seed)[0]
    raise ValueError(f"unknown mode {mode!r}")
