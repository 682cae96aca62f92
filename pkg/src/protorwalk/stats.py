"""Empirical distributions, KS tests, binomial checks and recurrence summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decomposition import quadratic_variation_ratio  # noqa: F401  re-exported
from .params import WalkParams
from .rng import trajectory_seed
from .walk import run_walk_streaming

# Asymptotic Kolmogorov critical values c(alpha) = sqrt(-ln(alpha / 2) / 2).
KS_CRITICAL = {0.01: 1.6276, 0.05: 1.3581}


@dataclass(frozen=True)
class EmpiricalSample:
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.sort(np.asarray(self.values, dtype=np.float64).ravel())
        if v.size == 0:
            raise ValueError("empirical sample must be nonempty")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def cdf(self, x):
        """Right-continuous ECDF: fraction of values <= x."""
        return np.searchsorted(self.values, x, side="right") / self.n

    def merge(self, other: "EmpiricalSample") -> "EmpiricalSample":
        return EmpiricalSample(np.concatenate([self.values, other.values]))


def _sample(s) -> EmpiricalSample:
    return s if isinstance(s, EmpiricalSample) else EmpiricalSample(s)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    n1: int
    n2: int
    threshold: float
    passed: bool

    def as_dict(self, name: str | None = None) -> dict:
        d = {"D": self.statistic, "threshold": self.threshold,
             "n1": self.n1, "n2": self.n2, "pass": self.passed}
        if name is not None:
            d = {"test": name, **d}
        return d


def ks_critical(significance: float) -> float:
    if significance in KS_CRITICAL:
        return KS_CRITICAL[significance]
    if not 0 < significance < 1:
        raise ValueError("significance must lie in (0, 1)")
    return math.sqrt(-math.log(significance / 2.0) / 2.0)


def ks_statistic(s1, s2) -> float:
    a, b = _sample(s1), _sample(s2)
    pooled = np.concatenate([a.values, b.values])
    return float(np.max(np.abs(a.cdf(pooled) - b.cdf(pooled))))


def ks_two_sample(s1, s2, significance: float = 0.01, slack: float = 0.0) -> KSResult:
    """Two-sample KS test with the asymptotic critical value.

    ``slack`` widens the threshold by a fixed budget, e.g. for grid
    discretisation on one side.
    """
    a, b = _sample(s1), _sample(s2)
    d = ks_statistic(a, b)
    thr = ks_critical(significance) * math.sqrt((a.n + b.n) / (a.n * b.n)) + slack
    return KSResult(statistic=d, n1=a.n, n2=b.n, threshold=thr, passed=d < thr)


def binomial_ci_check(successes: int, trials: int, p0: float, z: float = 3.0) -> bool:
    """|successes/trials - p0| <= z sqrt(p0 (1 - p0) / trials)."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"invalid counts {successes}/{trials}")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError("p0 must lie in [0, 1]")
    return abs(successes / trials - p0) <= z * math.sqrt(p0 * (1.0 - p0) / trials)


@dataclass(frozen=True)
class RecurrenceReport:
    n_steps: int
    n_paths: int
    returned_fraction: float
    mean_return_count: float
    max_ratio: float
    min_ratio: float
    mean_max_ratio: float
    mean_min_ratio: float

    def as_dict(self) -> dict:
        return {
            "n_steps": self.n_steps, "n_paths": self.n_paths,
            "returned_fraction": self.returned_fraction,
            "mean_return_count": self.mean_return_count,
            "max_ratio": self.max_ratio, "min_ratio": self.min_ratio,
            "mean_max_ratio": self.mean_max_ratio, "mean_min_ratio": self.mean_min_ratio,
        }


def summarize_recurrence(n_steps: int, returns: np.ndarray, maxima: np.ndarray,
                         minima: np.ndarray) -> RecurrenceReport:
    """Aggregate per-path results given in trajectory-index order.

    ``max_ratio`` and ``min_ratio`` are the worst paths' M_n/n and |m_n|/n.
    """
    returns = np.asarray(returns)
    return RecurrenceReport(
        n_steps=n_steps, n_paths=len(returns),
        returned_fraction=float(np.mean(returns > 0)),
        mean_return_count=float(np.mean(returns)),
        max_ratio=float(np.max(maxima) / n_steps),
        min_ratio=float(np.max(-np.asarray(minima)) / n_steps),
        mean_max_ratio=float(np.mean(maxima) / n_steps),
        mean_min_ratio=float(np.mean(-np.asarray(minima)) / n_steps),
    )


def recurrence_report(params: WalkParams, n_steps: int, n_paths: int,
                      master_seed: int, overrides=None) -> RecurrenceReport:
    if n_steps < 1 or n_paths < 1:
        raise ValueError("n_steps and n_paths must be >= 1")
    returns = np.empty(n_paths, dtype=np.int64)
    maxima = np.empty(n_paths, dtype=np.int64)
    minima = np.empty(n_paths, dtype=np.int64)
    for i in range(n_paths):
        s = run_walk_streaming(params, n_steps, trajectory_seed(master_seed, i), overrides)
        returns[i], maxima[i], minima[i] = s.returns, s.max, s.min
    return summarize_recurrence(n_steps, returns, maxima, minima)
