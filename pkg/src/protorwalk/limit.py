"""Sample paths and marginals of the limiting processes.

Doubly perturbed Brownian motion solves X = B + a sup X + b inf X. On a grid
the equation is solved exactly step by step: a new value either stays
inside the current range, sets a new supremum, or sets a new infimum, and
each case is a scalar linear equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .params import PerturbationParams, WalkParams, derive_perturbation
from .rng import block_rng

INTERIOR, NEW_SUP, NEW_INF = 0, 1, 2
BLOCK = 100


@dataclass(frozen=True)
class GridSpec:
    horizon: float
    steps: int

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError("grid needs at least one step")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)

    def index(self, t: float) -> int:
        k = round(t / self.dt)
        if not math.isclose(k * self.dt, t, rel_tol=1e-9, abs_tol=1e-12) or not 0 <= k <= self.steps:
            raise ValueError(f"time {t} is not a grid point of {self}")
        return k


@dataclass
class LimitPath:
    grid: GridSpec | None
    brownian: np.ndarray
    solved: np.ndarray
    sup: np.ndarray
    inf: np.ndarray
    cases: np.ndarray

    def residual(self, a: float, b: float) -> float:
        return float(np.max(np.abs(self.solved - self.brownian - a * self.sup - b * self.inf)))


def _as_rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def brownian_path(grid: GridSpec, seed) -> np.ndarray:
    rng = _as_rng(seed)
    out = np.zeros(grid.steps + 1)
    np.cumsum(rng.standard_normal(grid.steps) * math.sqrt(grid.dt), out=out[1:])
    return out


@njit(cache=True, nogil=True)
def _solve(B, a, b, X, S, I, cases):
    s = 0.0
    i = 0.0
    X[0] = B[0]
    s = X[0]
    i = X[0]
    S[0] = s
    I[0] = i
    cases[0] = 0
    for k in range(1, B.shape[0]):
        x = B[k] + a * s + b * i
        if x > s:
            x = (B[k] + b * i) / (1.0 - a)
            s = x
            cases[k] = 1
        elif x < i:
            x = (B[k] + a * s) / (1.0 - b)
            i = x
            cases[k] = 2
        else:
            cases[k] = 0
        X[k] = x
        S[k] = s
        I[k] = i


def _check_ab(a: float, b: float) -> None:
    if not (a < 1.0 and b < 1.0):
        raise ValueError(f"need a < 1 and b < 1, got a={a}, b={b}")


def solve_dpbm(brownian, a: float, b: float, grid: GridSpec | None = None) -> LimitPath:
    """Grid solution of X = B + a sup X + b inf X driven by ``brownian``."""
    _check_ab(a, b)
    B = np.ascontiguousarray(brownian, dtype=np.float64)
    n = B.shape[0]
    X, S, I = np.empty(n), np.empty(n), np.empty(n)
    cases = np.empty(n, dtype=np.int8)
    _solve(B, a, b, X, S, I, cases)
    return LimitPath(grid=grid, brownian=B, solved=X, sup=S, inf=I, cases=cases)


def fixed_point_solve(brownian, a: float, b: float, tol: float = 1e-13,
                      max_iter: int = 10_000) -> np.ndarray:
    """Global Picard iteration h <- B + a runsup(h) + b runinf(h), started at h = B.

    A contraction in the sup norm when |a| + |b| < 1.
    """
    B = np.asarray(brownian, dtype=np.float64)
    h = B.copy()
    for _ in range(max_iter):
        nxt = B + a * np.maximum.accumulate(h) + b * np.minimum.accumulate(h)
        if np.max(np.abs(nxt - h)) < tol:
            return nxt
        h = nxt
    raise RuntimeError("fixed-point iteration did not converge")


def sample_bm_with_max(t: float, seed, size: int | None = None):
    """Exact draw of (B(t), sup_{s<=t} B(s)).

    Given B(t) = x, the maximum has P(M >= m | x) = exp(-2 m (m - x) / t) for
    m >= max(0, x); inverting at a uniform u gives M = (x + sqrt(x^2 - 2 t ln u)) / 2.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    rng = _as_rng(seed)
    x = rng.normal(0.0, math.sqrt(t), size)
    u = 1.0 - rng.random(size)  # (0, 1]
    m = 0.5 * (x + np.sqrt(x * x - 2.0 * t * np.log(u)))
    return x, m


def _require_one_sided(params: WalkParams) -> PerturbationParams:
    if params.beta != 0.0:
        raise ValueError("the explicit one-sided limit needs beta = 0")
    return derive_perturbation(params)


def one_sided_limit_sample(params: WalkParams, t: float, seed, size: int | None = None):
    """sqrt((1-p)/p) (B(t) + lam M(t)) from exact joint draws."""
    pert = _require_one_sided(params)
    b, m = sample_bm_with_max(t, seed, size)
    return pert.scale * (b + pert.lam * m)


def one_sided_limit_marginals(params: WalkParams, times, n_samples: int, master_seed: int,
                              tag: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Independent exact samples of the one-sided limit and of its running sup.

    Returns arrays of shape (len(times), n_samples). The sup of B + lam M is
    (1 + lam) M since 1 + lam = 1 / (1 - a) > 0.
    """
    pert = _require_one_sided(params)
    times = list(times)
    X = np.empty((len(times), n_samples))
    S = np.empty((len(times), n_samples))
    for ti, t in enumerate(times):
        for blk, start in enumerate(range(0, n_samples, BLOCK)):
            stop = min(start + BLOCK, n_samples)
            rng = block_rng(master_seed, tag, ti * 1_000_000 + blk)
            b, m = sample_bm_with_max(t, rng, stop - start)
            X[ti, start:stop] = pert.scale * (b + pert.lam * m)
            S[ti, start:stop] = pert.scale * (1.0 + pert.lam) * m
    return X, S


@njit(cache=True, nogil=True)
def _solve_block(incr, a, b, idx, outx, outs):
    n_paths, steps = incr.shape
    ncp = idx.shape[0]
    for r in range(n_paths):
        bm = 0.0
        s = 0.0
        i = 0.0
        ci = 0
        while ci < ncp and idx[ci] == 0:
            outx[ci, r] = 0.0
            outs[ci, r] = 0.0
            ci += 1
        for k in range(steps):
            bm += incr[r, k]
            x = bm + a * s + b * i
            if x > s:
                x = (bm + b * i) / (1.0 - a)
                s = x
            elif x < i:
                x = (bm + a * s) / (1.0 - b)
                i = x
            while ci < ncp and idx[ci] == k + 1:
                outx[ci, r] = x
                outs[ci, r] = s
                ci += 1


def dpbm_marginals(perturb: PerturbationParams, times, n_samples: int, master_seed: int,
                   grid_steps: int = 10_000, tag: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Scaled DPBM values and running sups at ``times`` from the grid solver.

    The grid spans [0, max(times)] with ``grid_steps`` increments; every
    requested time must be a grid point. Output shape (len(times), n_samples).
    """
    _check_ab(perturb.a, perturb.b)
    times = list(times)
    grid = GridSpec(max(times), grid_steps)
    idx = np.array([grid.index(t) for t in times], dtype=np.int64)
    order = np.argsort(idx, kind="stable")
    X = np.empty((len(times), n_samples))
    S = np.empty((len(times), n_samples))
    sd = math.sqrt(grid.dt)
    for blk, start in enumerate(range(0, n_samples, BLOCK)):
        stop = min(start + BLOCK, n_samples)
        rng = block_rng(master_seed, tag, blk)
        incr = rng.standard_normal((stop - start, grid_steps)) * sd
        ox = np.empty((len(times), stop - start))
        os_ = np.empty((len(times), stop - start))
        _solve_block(incr, perturb.a, perturb.b, idx[order], ox, os_)
        X[order, start:stop] = ox
        S[order, start:stop] = os_
    return perturb.scale * X, perturb.scale * S


def dpbm_sample(perturb: PerturbationParams, t: float, grid_steps: int, seed,
                size: int = 1) -> np.ndarray:
    """Endpoints sqrt((1-p)/p) X_{a,b}(t) of independently solved grid paths."""
    _check_ab(perturb.a, perturb.b)
    rng = _as_rng(seed)
    grid = GridSpec(t, grid_steps)
    out = np.empty(size)
    for r in range(size):
        path = solve_dpbm(brownian_path(grid, rng), perturb.a, perturb.b, grid)
        out[r] = path.solved[-1]
    return perturb.scale * out
