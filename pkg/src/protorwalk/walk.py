"""p-rotor walk on Z.

Two engines share one source of randomness. :func:`step` drives a
:class:`~protorwalk.environment.RotorEnvironment` one move at a time and is
the readable reference. :func:`run_walk` and :func:`run_walk_streaming` use a
compiled kernel over a dense, growable rotor window covering the visited
interval; given the same seed both engines produce identical paths.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .environment import CoinStream, RotorEnvironment, sample_environment
from .params import WalkParams
from .rng import site_counter, stream_keys, uniform

MAX_RECORD_STEPS = 50_000_000


class ResourceLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class StepRecord:
    index: int
    position: int
    coin: int
    rotor_before: int
    rotor_after: int
    new_max: bool
    new_min: bool
    fresh: bool

    @property
    def displacement(self) -> int:
        return self.rotor_after


@dataclass
class WalkState:
    n: int = 0
    position: int = 0
    max: int = 0
    min: int = 0


def step(env: RotorEnvironment, state: WalkState, coins: CoinStream) -> StepRecord:
    """Advance ``state`` by one move, flipping the local rotor unless broken."""
    x = state.position
    fresh = env.is_fresh(x)
    before = env.rotor(x)
    coin = coins(state.n)
    after = coin * before
    env.set(x, after)
    new = x + after
    rec = StepRecord(index=state.n, position=x, coin=coin, rotor_before=before,
                     rotor_after=after, new_max=new > state.max,
                     new_min=new < state.min, fresh=fresh)
    state.n += 1
    state.position = new
    state.max = max(state.max, new)
    state.min = min(state.min, new)
    return rec


@dataclass
class Trajectory:
    """A recorded walk X_0..X_N with per-step coin/rotor data.

    Step arrays have length N; ``positions`` and the running extrema have
    length N + 1. ``rotors`` holds the rotor left behind at X_k after step k.
    """

    params: WalkParams
    seed: int
    positions: np.ndarray
    coins: np.ndarray
    rotors: np.ndarray
    fresh: np.ndarray
    overrides: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.running_max = np.maximum.accumulate(self.positions)
        self.running_min = np.minimum.accumulate(self.positions)

    @property
    def n_steps(self) -> int:
        return len(self.coins)

    @property
    def displacements(self) -> np.ndarray:
        return np.diff(self.positions)

    @property
    def rotors_before(self) -> np.ndarray:
        return self.coins * self.rotors

    @property
    def new_max(self) -> np.ndarray:
        return self.positions[1:] > self.running_max[:-1]

    @property
    def new_min(self) -> np.ndarray:
        return self.positions[1:] < self.running_min[:-1]

    @property
    def steps(self) -> list[StepRecord]:
        before = self.rotors_before
        nmax, nmin = self.new_max, self.new_min
        return [StepRecord(index=k, position=int(self.positions[k]), coin=int(self.coins[k]),
                           rotor_before=int(before[k]), rotor_after=int(self.rotors[k]),
                           new_max=bool(nmax[k]), new_min=bool(nmin[k]),
                           fresh=bool(self.fresh[k]))
                for k in range(self.n_steps)]


@dataclass(frozen=True)
class WalkSummary:
    """Streaming-mode result: endpoint, extrema and return statistics.

    ``checkpoint_*`` hold X, M, m at the requested step indices.
    """

    params: WalkParams
    seed: int
    n_steps: int
    position: int
    max: int
    min: int
    returns: int
    first_return: int
    reversals: int
    checkpoints: np.ndarray
    checkpoint_x: np.ndarray
    checkpoint_max: np.ndarray
    checkpoint_min: np.ndarray


@njit(cache=True, nogil=True)
def _draw_rotor(env_key, x, alpha, beta):
    u = uniform(env_key, site_counter(x))
    if x > 0:
        return 1 if u < alpha else -1
    if x < 0:
        return -1 if u < beta else 1
    return 1 if u < 0.5 else -1


@njit(cache=True, nogil=True)
def _walk_kernel(n, p, alpha, beta, env_key, coin_key, ov_sites, ov_vals,
                 record, positions, coins, rotors, fresh,
                 checkpoints, cp_x, cp_max, cp_min, stats):
    # Rotor window env[i] <-> site i - off; 0 marks a site not yet initialised.
    cap = 64
    off = 32
    env = np.zeros(cap, dtype=np.int8)
    x = 0
    hi = 0
    lo = 0
    returns = 0
    first_return = -1
    reversals = 0
    last = 0
    ci = 0
    ncp = checkpoints.shape[0]
    if record:
        positions[0] = 0
    while ci < ncp and checkpoints[ci] == 0:
        cp_x[ci] = 0
        cp_max[ci] = 0
        cp_min[ci] = 0
        ci += 1
    for k in range(n):
        i = x + off
        if i <= 0 or i >= cap - 1:
            new_cap = 2 * cap
            new_off = off + cap // 2
            grown = np.zeros(new_cap, dtype=np.int8)
            grown[cap // 2:cap // 2 + cap] = env
            env = grown
            cap = new_cap
            off = new_off
            i = x + off
        r = env[i]
        is_fresh = r == 0
        if is_fresh:
            r = 0
            for j in range(ov_sites.shape[0]):
                if ov_sites[j] == x:
                    r = ov_vals[j]
                    break
            if r == 0:
                r = _draw_rotor(env_key, x, alpha, beta)
        coin = 1 if uniform(coin_key, k) < p else -1
        after = coin * r
        env[i] = after
        if record:
            coins[k] = coin
            rotors[k] = after
            fresh[k] = is_fresh
        if k > 0 and after != last:
            reversals += 1
        last = after
        x += after
        if x > hi:
            hi = x
        elif x < lo:
            lo = x
        if x == 0:
            returns += 1
            if first_return < 0:
                first_return = k + 1
        if record:
            positions[k + 1] = x
        while ci < ncp and checkpoints[ci] == k + 1:
            cp_x[ci] = x
            cp_max[ci] = hi
            cp_min[ci] = lo
            ci += 1
    stats[0] = x
    stats[1] = hi
    stats[2] = lo
    stats[3] = returns
    stats[4] = first_return
    stats[5] = reversals


def _override_arrays(overrides: Mapping[int, int] | None):
    items = sorted((overrides or {}).items())
    for site, v in items:
        if v not in (-1, 1):
            raise ValueError(f"rotor at site {site} must be +1 or -1, got {v!r}")
    sites = np.array([s for s, _ in items], dtype=np.int64)
    vals = np.array([v for _, v in items], dtype=np.int8)
    return sites, vals


def _kernel_keys(seed: int):
    env_key, coin_key = stream_keys(seed)
    return np.uint64(env_key), np.uint64(coin_key)


def run_walk(params: WalkParams, n_steps: int, seed: int,
             overrides: Mapping[int, int] | None = None,
             max_steps: int = MAX_RECORD_STEPS) -> Trajectory:
    """Simulate ``n_steps`` moves and record every step."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if n_steps > max_steps:
        raise ResourceLimitError(
            f"recording {n_steps} steps exceeds the budget of {max_steps}; "
            "use run_walk_streaming")
    env_key, coin_key = _kernel_keys(seed)
    sites, vals = _override_arrays(overrides)
    positions = np.empty(n_steps + 1, dtype=np.int64)
    coins = np.empty(n_steps, dtype=np.int8)
    rotors = np.empty(n_steps, dtype=np.int8)
    fresh = np.empty(n_steps, dtype=np.bool_)
    empty = np.empty(0, dtype=np.int64)
    stats = np.empty(6, dtype=np.int64)
    _walk_kernel(n_steps, params.p, params.alpha, params.beta, env_key, coin_key,
                 sites, vals, True, positions, coins, rotors, fresh,
                 empty, empty, empty, empty, stats)
    return Trajectory(params=params, seed=seed, positions=positions, coins=coins,
                      rotors=rotors, fresh=fresh, overrides=dict(overrides or {}))


def run_walk_streaming(params: WalkParams, n_steps: int, seed: int,
                       overrides: Mapping[int, int] | None = None,
                       checkpoints=()) -> WalkSummary:
    """Simulate without storing the path; memory is O(range of the walk)."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    if cps.size and (cps[0] < 0 or cps[-1] > n_steps):
        raise ValueError("checkpoints must lie in [0, n_steps]")
    env_key, coin_key = _kernel_keys(seed)
    sites, vals = _override_arrays(overrides)
    cp_x = np.empty(cps.size, dtype=np.int64)
    cp_max = np.empty(cps.size, dtype=np.int64)
    cp_min = np.empty(cps.size, dtype=np.int64)
    stats = np.empty(6, dtype=np.int64)
    e64, e8, eb = np.empty(0, np.int64), np.empty(0, np.int8), np.empty(0, np.bool_)
    _walk_kernel(n_steps, params.p, params.alpha, params.beta, env_key, coin_key,
                 sites, vals, False, e64, e8, e8, eb, cps, cp_x, cp_max, cp_min, stats)
    return WalkSummary(params=params, seed=seed, n_steps=n_steps,
                       position=int(stats[0]), max=int(stats[1]), min=int(stats[2]),
                       returns=int(stats[3]), first_return=int(stats[4]),
                       reversals=int(stats[5]), checkpoints=cps, checkpoint_x=cp_x,
                       checkpoint_max=cp_max, checkpoint_min=cp_min)


def run_walk_reference(params: WalkParams, n_steps: int, seed: int,
                       overrides: Mapping[int, int] | None = None) -> Trajectory:
    """Pure-Python engine built from :func:`step`; slow, used to cross-check."""
    env = sample_environment(params, overrides, seed)
    coins = CoinStream.for_seed(params.p, seed)
    state = WalkState()
    recs = [step(env, state, coins) for _ in range(n_steps)]
    positions = np.zeros(n_steps + 1, dtype=np.int64)
    positions[1:] = np.cumsum([r.rotor_after for r in recs])
    return Trajectory(params=params, seed=seed, positions=positions,
                      coins=np.array([r.coin for r in recs], dtype=np.int8),
                      rotors=np.array([r.rotor_after for r in recs], dtype=np.int8),
                      fresh=np.array([r.fresh for r in recs], dtype=np.bool_),
                      overrides=dict(overrides or {}))


@njit(cache=True)
def _orientation_violations(positions, rotors):
    n = rotors.shape[0]
    lo = positions.min()
    span = positions.max() - lo + 1
    last_exit = np.zeros(span, dtype=np.int8)
    m = 0
    M = 0
    bad = 0
    for k in range(n + 1):
        cur = positions[k]
        if cur > M:
            M = cur
        if cur < m:
            m = cur
        for site in range(m, M + 1):
            e = last_exit[site - lo]
            if site == cur or e == 0:
                continue
            if e != (1 if site < cur else -1):
                bad += 1
        if k < n:
            last_exit[cur - lo] = rotors[k]
    return bad


def rotor_orientation_violations(traj: Trajectory) -> int:
    """Count (time, site) pairs where a visited rotor does not point at the walker.

    Replays the rotor field from the recorded steps and scans the whole
    visited interval at every time, so it shares no logic with the engine.
    """
    return int(_orientation_violations(traj.positions, traj.rotors))
