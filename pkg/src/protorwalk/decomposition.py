"""Martingale/compensator decomposition of a recorded walk and its identities.

For a recorded trajectory with N steps the sequences are indexed as

* ``drift[k]``, ``xi[k]`` for k = 0..N-1 (step k goes from X_k to X_{k+1});
* ``Y[n]``, ``Z[n]`` for n = 0..N (partial sums over k < n);
* ``V[n] = sum_{k=1}^{n} E[xi_k^2 | F_k]`` for n = 0..N-1;
* ``W[n] = (Y[n+1] - Delta_n) / (2p)`` for n = 0..N-1;
* ``C[n]`` for n = 1..N (``C[0]`` is unused and set to 0).

Identities involving W are therefore checked on 0..N-1: simulate one step
past the horizon of interest.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .params import PerturbationParams, WalkParams, derive_perturbation
from .walk import Trajectory

IDENTITY_TOL = 1e-8


class SiteKind(enum.Enum):
    ORIGIN = "origin"      # X_0, initial rotor uniform
    NEW_MAX = "new_max"    # X_k > M_{k-1}
    NEW_MIN = "new_min"    # X_k < m_{k-1}
    VISITED = "visited"    # m_{k-1} <= X_k <= M_{k-1}


def classify_site(k: int, position: int, prev_max: int, prev_min: int,
                  fresh: bool | None = None) -> SiteKind:
    """Kind of the site occupied at time k; ``fresh`` is cross-checked if given."""
    if k == 0:
        kind = SiteKind.ORIGIN
    elif position > prev_max:
        kind = SiteKind.NEW_MAX
    elif position < prev_min:
        kind = SiteKind.NEW_MIN
    else:
        kind = SiteKind.VISITED
    if fresh is not None and fresh != (kind is not SiteKind.VISITED):
        raise ValueError(f"step {k}: fresh={fresh} contradicts position {position} "
                         f"against extrema [{prev_min}, {prev_max}]")
    return kind


def conditional_drift(params: WalkParams, kind: SiteKind, rotor: int | None = None) -> float:
    """E[Delta_k | F_k] given the kind of site and, if visited, its rotor."""
    bias = 2.0 * params.p - 1.0
    if kind is SiteKind.VISITED:
        if rotor not in (-1, 1):
            raise ValueError("a visited site needs its current rotor (+1 or -1)")
        return bias * rotor
    if kind is SiteKind.NEW_MAX:
        return bias * (2.0 * params.alpha - 1.0)
    if kind is SiteKind.NEW_MIN:
        return bias * (1.0 - 2.0 * params.beta)
    return 0.0


@dataclass
class DecompositionRecord:
    params: WalkParams
    drift: np.ndarray
    xi: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    V: np.ndarray
    W: np.ndarray
    C: np.ndarray


def _require_recorded(traj) -> None:
    if not isinstance(traj, Trajectory):
        raise TypeError("decomposition needs a recorded Trajectory, not a streaming summary")


def drift_sequence(traj: Trajectory, params: WalkParams) -> np.ndarray:
    """Conditional drifts for every recorded step, vectorised.

    Pinned initial rotors enter with their known value instead of the law.
    """
    _require_recorded(traj)
    x = traj.positions
    bias = 2.0 * params.p - 1.0
    n = traj.n_steps
    prev_max = traj.running_max[:-1]
    prev_min = traj.running_min[:-1]
    new_max = np.zeros(n, dtype=bool)
    new_min = np.zeros(n, dtype=bool)
    new_max[1:] = x[1:n] > prev_max[:n - 1]
    new_min[1:] = x[1:n] < prev_min[:n - 1]
    fresh_kind = new_max | new_min
    fresh_kind[0] = True
    if not np.array_equal(fresh_kind, traj.fresh):
        raise ValueError("fresh flags inconsistent with the recorded positions")
    drift = bias * traj.rotors_before.astype(np.float64)
    drift[new_max] = bias * (2.0 * params.alpha - 1.0)
    drift[new_min] = bias * (1.0 - 2.0 * params.beta)
    drift[0] = 0.0
    if traj.overrides:
        for k in np.flatnonzero(fresh_kind):
            pinned = traj.overrides.get(int(x[k]))
            if pinned is not None:
                drift[k] = bias * pinned
    return drift


def decompose(traj: Trajectory, params: WalkParams | None = None) -> DecompositionRecord:
    params = params or traj.params
    drift = drift_sequence(traj, params)
    delta = traj.displacements.astype(np.float64)
    xi = delta - drift
    N = traj.n_steps
    Y = np.zeros(N + 1)
    Z = np.zeros(N + 1)
    np.cumsum(xi, out=Y[1:])
    np.cumsum(drift, out=Z[1:])
    V = np.zeros(N)
    np.cumsum(1.0 - drift[1:] ** 2, out=V[1:])
    W = (Y[1:] - delta) / (2.0 * params.p)
    return DecompositionRecord(params=params, drift=drift, xi=xi, Y=Y, Z=Z, V=V, W=W,
                               C=c_sequence(traj))


def c_sequence(traj: Trajectory) -> np.ndarray:
    """C_n = m_{n-1} + sum_{k=1}^{n-1} Delta_{k-1} 1{m_{k-1} <= X_k <= M_{k-1}} + M_{n-1}."""
    x = traj.positions
    d = np.diff(x)
    N = traj.n_steps
    inside = (traj.running_min[:N - 1] <= x[1:N]) & (x[1:N] <= traj.running_max[:N - 1])
    partial = np.zeros(N, dtype=np.int64)
    np.cumsum(d[:N - 1] * inside, out=partial[1:])
    C = np.zeros(N + 1, dtype=np.int64)
    C[1:] = traj.running_min[:N] + partial + traj.running_max[:N]
    return C


def compensator_closed_form(traj: Trajectory, params: WalkParams, n: int) -> float:
    """Z_n = (2p - 1)(2 beta m_{n-1} + 2 alpha M_{n-1} - X_{n-1})."""
    if not 1 <= n <= traj.n_steps:
        raise ValueError(f"n must lie in [1, {traj.n_steps}], got {n}")
    return (2.0 * params.p - 1.0) * (2.0 * params.beta * traj.running_min[n - 1]
                                     + 2.0 * params.alpha * traj.running_max[n - 1]
                                     - traj.positions[n - 1])


def compensator_residual(traj: Trajectory, record: DecompositionRecord) -> float:
    p = record.params
    closed = (2.0 * p.p - 1.0) * (2.0 * p.beta * traj.running_min[:-1]
                                  + 2.0 * p.alpha * traj.running_max[:-1]
                                  - traj.positions[:-1])
    return float(np.max(np.abs(closed - record.Z[1:])))


def martingale_residual(traj: Trajectory, record: DecompositionRecord) -> float:
    return float(np.max(np.abs(traj.positions - record.Y - record.Z)))


def verify_c_identity(traj: Trajectory) -> int:
    """max_n |C_n - X_{n-1}|; integer arithmetic, so the contract is exactly 0."""
    C = c_sequence(traj)
    return int(np.max(np.abs(C[1:] - traj.positions[:-1])))


def _horizon(record: DecompositionRecord, horizon: int | None) -> int:
    avail = len(record.W) - 1
    if horizon is None:
        return avail
    if horizon > avail:
        raise ValueError(f"W is known up to n={avail}; simulate one step past the "
                         f"horizon {horizon}")
    return horizon


def reconstruct_from_extrema(record: DecompositionRecord, traj: Trajectory,
                             perturb: PerturbationParams | None = None,
                             horizon: int | None = None) -> float:
    """max_{1<=n<=N} |X_n - W_n - a M_n - b m_n|."""
    perturb = perturb or derive_perturbation(record.params)
    N = _horizon(record, horizon)
    s = slice(1, N + 1)
    res = (traj.positions[s] - record.W[s] - perturb.a * traj.running_max[s]
           - perturb.b * traj.running_min[s])
    return float(np.max(np.abs(res))) if N >= 1 else 0.0


def theta_map(path, a: float, b: float) -> np.ndarray:
    """h - a * (running max of h) - b * (running min of h)."""
    h = np.asarray(path, dtype=np.float64)
    return h - a * np.maximum.accumulate(h) - b * np.minimum.accumulate(h)


def theta_residual(record: DecompositionRecord, traj: Trajectory,
                   perturb: PerturbationParams | None = None,
                   horizon: int | None = None) -> float:
    perturb = perturb or derive_perturbation(record.params)
    N = _horizon(record, horizon)
    th = theta_map(traj.positions[:N + 1], perturb.a, perturb.b)
    return float(np.max(np.abs(th - record.W[:N + 1])))


@dataclass
class ExtremaIdentityRecord:
    g: np.ndarray
    G: np.ndarray
    reconstructed_max: np.ndarray
    reconstructed_min: np.ndarray


def extrema_identities(record: DecompositionRecord, traj: Trajectory,
                       perturb: PerturbationParams | None = None,
                       horizon: int | None = None) -> ExtremaIdentityRecord:
    perturb = perturb or derive_perturbation(record.params)
    a, b = perturb.a, perturb.b
    N = _horizon(record, horizon)
    W = record.W[:N + 1]
    M = traj.running_max[:N + 1]
    m = traj.running_min[:N + 1]
    g = np.minimum.accumulate(W + a * M)
    G = np.maximum.accumulate(W + b * m)
    rmax = np.maximum.accumulate(W + b / (1.0 - b) * g) / (1.0 - a)
    rmin = np.minimum.accumulate(W + a / (1.0 - a) * G) / (1.0 - b)
    return ExtremaIdentityRecord(g=g, G=G, reconstructed_max=rmax, reconstructed_min=rmin)


def verify_extrema_identities(record: DecompositionRecord, traj: Trajectory,
                              perturb: PerturbationParams | None = None,
                              horizon: int | None = None) -> tuple[float, float]:
    ext = extrema_identities(record, traj, perturb, horizon)
    N = len(ext.g)
    return (float(np.max(np.abs(ext.reconstructed_max - traj.running_max[:N]))),
            float(np.max(np.abs(ext.reconstructed_min - traj.running_min[:N]))))


def max_diff_inequality_check(x, n: int, j: int) -> bool:
    """max_{k<=n+j} x_k - max_{k<=j} x_k <= max_{k<=n} (x_{j+k} - x_j)."""
    x = np.asarray(x, dtype=np.float64)
    if n < 0 or j < 0:
        raise ValueError("n and j must be non-negative")
    if len(x) < n + j + 1:
        raise ValueError(f"sequence of length {len(x)} too short for n={n}, j={j}")
    lhs = x[:n + j + 1].max() - x[:j + 1].max()
    rhs = (x[j:j + n + 1] - x[j]).max()
    return bool(lhs <= rhs)


def bound_grid(N: int) -> list[tuple[int, int]]:
    """(j, n) pairs with j in {0, N/10, ..., 9N/10}, n in {1, N/100, N/10}, j + n <= N."""
    js = sorted({(i * N) // 10 for i in range(10)})
    ns = sorted({1, max(1, N // 100), max(1, N // 10)})
    return [(j, n) for j in js for n in ns if j + n <= N]


def max_diff_bound_check(record: DecompositionRecord, traj: Trajectory,
                         perturb: PerturbationParams | None = None,
                         horizon: int | None = None, tol: float = 1e-9,
                         constant: float | None = None) -> bool:
    """|M_{j+n} - M_j| and |m_{j+n} - m_j| <= C max_{k<=n} |W_{j+k} - W_j| on the grid.

    ``constant`` defaults to ``perturb.bound_constant``.
    """
    perturb = perturb or derive_perturbation(record.params)
    C = perturb.bound_constant if constant is None else constant
    N = _horizon(record, horizon)
    W = record.W
    M, m = traj.running_max, traj.running_min
    for j, n in bound_grid(N):
        wmax = np.max(np.abs(W[j:j + n + 1] - W[j]))
        if abs(M[j + n] - M[j]) > C * wmax + tol:
            return False
        if abs(m[j + n] - m[j]) > C * wmax + tol:
            return False
    return True


def quadratic_variation_formula(traj: Trajectory, params: WalkParams, n: int) -> float:
    """V_n / n from the extrema alone:
    1 - (2p-1)^2 [n - 4 beta (1-beta) |m_n| - 4 alpha (1-alpha) M_n] / n.
    """
    b2 = (2.0 * params.p - 1.0) ** 2
    M, m = traj.running_max[n], -traj.running_min[n]
    return 1.0 - b2 * (n - 4 * params.beta * (1 - params.beta) * m
                       - 4 * params.alpha * (1 - params.alpha) * M) / n


def quadratic_variation_ratio(record: DecompositionRecord, n: int) -> float:
    if n <= 0:
        raise ValueError("n must be >= 1")
    if n >= len(record.V):
        raise ValueError(f"V is known up to n={len(record.V) - 1}")
    return float(record.V[n] / n)


def verification_report(traj: Trajectory, horizon: int | None = None,
                        tol: float = IDENTITY_TOL) -> dict:
    """Residual of every exact identity on one trajectory, JSON-ready."""
    params = traj.params
    perturb = derive_perturbation(params)
    rec = decompose(traj, params)
    h = _horizon(rec, horizon)
    emax, emin = verify_extrema_identities(rec, traj, perturb, h)
    residuals = {
        "martingale_decomposition": martingale_residual(traj, rec),
        "compensator_closed_form": compensator_residual(traj, rec),
        "c_identity": float(verify_c_identity(traj)),
        "extrema_decomposition": reconstruct_from_extrema(rec, traj, perturb, h),
        "theta_map": theta_residual(rec, traj, perturb, h),
        "extrema_max_reconstruction": emax,
        "extrema_min_reconstruction": emin,
    }
    out = {}
    for name, r in residuals.items():
        t = 0.0 if name == "c_identity" else tol
        out[name] = {"residual": r, "tolerance": t, "pass": r <= t}
    ok = max_diff_bound_check(rec, traj, perturb, h,
                              constant=perturb.corrected_bound_constant)
    out["max_diff_bound"] = {"constant": perturb.corrected_bound_constant, "pass": ok}
    # The textbook constant is only valid for a, b >= 0; reported, not gated.
    ok_textbook = max_diff_bound_check(rec, traj, perturb, h)
    out["max_diff_bound_textbook_constant"] = {"constant": perturb.bound_constant,
                                               "pass": ok_textbook, "gating": False}
    return out
