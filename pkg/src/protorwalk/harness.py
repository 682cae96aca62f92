"""Reproducible experiments over many trajectories.

Trajectory i of a run uses the seed ``trajectory_seed(master_seed, i)``, and
limit-process samples come in fixed blocks seeded by (master seed, tag,
block). Workers only change scheduling: results are gathered by index, so
reports are byte-identical for any worker count. Wall-clock time and worker
count are kept out of the report and written to a ``.timing.json`` sidecar.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .crw import crw_checkpoints
from .decomposition import (IDENTITY_TOL, decompose, quadratic_variation_formula,
                            quadratic_variation_ratio, verification_report)
from .io import dumps_json, write_samples, write_trajectory_csv
from .limit import dpbm_marginals, one_sided_limit_marginals
from .params import WalkParams, derive_perturbation
from .rng import trajectory_seed
from .stats import ks_two_sample, summarize_recurrence
from .walk import run_walk, run_walk_streaming

log = logging.getLogger(__name__)

GRID_SLACK = 0.01
LIMIT_TAG_EXACT = 1
LIMIT_TAG_GRID = 2


@dataclass
class ExperimentConfig:
    command: str = "compare"
    p: float = 0.75
    alpha: float = 1.0
    beta: float = 0.0
    steps: int = 10_000
    samples: int = 100
    grid_steps: int = 10_000
    times: tuple[float, ...] = (0.25, 0.5, 1.0)
    seed: int = 0
    workers: int = 1
    out: str | None = None
    significance: float = 0.01
    overrides: dict[int, int] = field(default_factory=dict)
    streaming: bool = False
    return_threshold: float = 0.95
    growth_threshold: float = 0.05

    def __post_init__(self) -> None:
        for name in ("steps", "samples", "grid_steps", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        self.times = tuple(sorted(float(t) for t in self.times))
        if not self.times or any(not 0 < t <= 1 for t in self.times):
            raise ValueError("marginal times must lie in (0, 1]")

    @property
    def params(self) -> WalkParams:
        return WalkParams(self.p, self.alpha, self.beta)

    def echo(self) -> dict:
        """Config as recorded in reports; scheduling fields are left out."""
        d = asdict(self)
        for k in ("workers", "out"):
            d.pop(k)
        d["times"] = list(self.times)
        d["overrides"] = {str(k): v for k, v in sorted(self.overrides.items())}
        return d


@dataclass
class ExperimentReport:
    command: str
    config: dict
    tests: list[dict]
    wall_clock: float = 0.0
    workers: int = 1

    @property
    def passed(self) -> bool:
        return all(t["pass"] for t in self.tests)

    def as_dict(self) -> dict:
        return {"command": self.command, "config": self.config, "tests": self.tests,
                "pass": self.passed}

    def dumps(self) -> str:
        return dumps_json(self.as_dict())

    def write(self, out_dir, name: str | None = None) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{name or self.command}_report.json"
        path.write_text(self.dumps())
        path.with_suffix(".timing.json").write_text(
            dumps_json({"wall_clock_s": self.wall_clock, "workers": self.workers}))
        return path


def _chunks(n: int, workers: int) -> list[range]:
    size = max(1, math.ceil(n / max(1, workers)))
    return [range(s, min(n, s + size)) for s in range(0, n, size)]


def parallel_map(fn, n: int, workers: int) -> list:
    """[fn(i) for i in range(n)], evaluated in contiguous chunks on a thread pool."""
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda r: [fn(i) for i in r], _chunks(n, workers))
        return [x for part in parts for x in part]


def walk_marginals(params: WalkParams, n_steps: int, times, n_samples: int,
                   master_seed: int, overrides=None, workers: int = 1):
    """X(nt)/sqrt(n) and M(nt)/sqrt(n) for every sample, shape (len(times), n_samples)."""
    cps = [round(n_steps * t) for t in times]

    def one(i):
        s = run_walk_streaming(params, n_steps, trajectory_seed(master_seed, i), overrides, cps)
        order = np.argsort(cps, kind="stable")
        x = np.empty(len(cps)), np.empty(len(cps))
        x[0][order] = s.checkpoint_x
        x[1][order] = s.checkpoint_max
        return x

    res = parallel_map(one, n_samples, workers)
    X = np.stack([r[0] for r in res], axis=1) / math.sqrt(n_steps)
    M = np.stack([r[1] for r in res], axis=1) / math.sqrt(n_steps)
    return X, M


def crw_marginals(q: float, n_steps: int, times, n_samples: int, master_seed: int,
                  workers: int = 1) -> np.ndarray:
    cps = sorted(round(n_steps * t) for t in times)
    res = parallel_map(lambda i: crw_checkpoints(q, n_steps, trajectory_seed(master_seed, i), cps),
                       n_samples, workers)
    return np.stack(res, axis=1) / math.sqrt(n_steps)


def limit_marginals(params: WalkParams, times, n_samples: int, master_seed: int,
                    grid_steps: int):
    """Samples of the scaled limit and its running sup; exact when beta = 0.

    Returns (X, S, used_grid).
    """
    if params.beta == 0.0:
        X, S = one_sided_limit_marginals(params, times, n_samples, master_seed, LIMIT_TAG_EXACT)
        return X, S, False
    X, S = dpbm_marginals(derive_perturbation(params), times, n_samples, master_seed,
                          grid_steps, LIMIT_TAG_GRID)
    return X, S, True


def _timed(fn):
    def wrapper(config: ExperimentConfig, *args, **kwargs) -> ExperimentReport:
        t0 = time.perf_counter()
        rep = fn(config, *args, **kwargs)
        rep.wall_clock = time.perf_counter() - t0
        rep.workers = config.workers
        if config.out is not None:
            path = rep.write(config.out)
            log.info("wrote %s", path)
        return rep
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def cmd_simulate(config: ExperimentConfig) -> ExperimentReport:
    """Write trajectory CSVs (recording) or one endpoint summary CSV (streaming)."""
    if config.out is None:
        raise ValueError("simulate needs an output directory")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    params = config.params
    files = []
    if config.streaming:
        def one(i):
            seed = trajectory_seed(config.seed, i)
            s = run_walk_streaming(params, config.steps, seed, config.overrides)
            return f"{i},{seed},{s.position},{s.max},{s.min},{s.returns}\n"
        rows = parallel_map(one, config.samples, config.workers)
        path = out / "endpoints.csv"
        try:
            path.write_text("index,seed,X,M,m,returns\n" + "".join(rows))
        except OSError as exc:
            raise OSError(f"failed to write {path}: {exc}") from exc
        files.append(path.name)
    else:
        def one(i):
            seed = trajectory_seed(config.seed, i)
            traj = run_walk(params, config.steps, seed, config.overrides)
            path = out / f"traj_{i:05d}.csv"
            try:
                write_trajectory_csv(traj, path, master_seed=config.seed, index=i)
            except OSError as exc:
                raise OSError(f"failed to write {path}: {exc}") from exc
            return path.name
        files = parallel_map(one, config.samples, config.workers)
    return ExperimentReport("simulate", config.echo(),
                            [{"test": "files_written", "files": files, "pass": True}])


@_timed
def cmd_verify(config: ExperimentConfig) -> ExperimentReport:
    """Run the exact-identity suite on ``samples`` trajectories of ``steps`` steps."""
    params = config.params
    n = config.steps

    def one(i):
        seed = trajectory_seed(config.seed, i)
        # W_n needs Y_{n+1}: simulate one step past the horizon.
        traj = run_walk(params, n + 1, seed, config.overrides)
        rep = verification_report(traj, horizon=n)
        rec = decompose(traj, params)
        qv = quadratic_variation_ratio(rec, n)
        qv_res = abs(qv - quadratic_variation_formula(traj, params, n))
        rep["quadratic_variation_formula"] = {"residual": qv_res, "tolerance": IDENTITY_TOL,
                                              "pass": qv_res <= IDENTITY_TOL}
        bound = (2 * params.p - 1) ** 2 * (traj.running_max[n] - traj.running_min[n]) / n
        gap = abs(qv - 4 * params.p * (1 - params.p))
        rep["quadratic_variation_bound"] = {"residual": gap, "tolerance": bound,
                                            "pass": gap <= bound + 1e-12}
        return seed, rep

    results = parallel_map(one, config.samples, config.workers)
    tests = []
    for name in results[0][1]:
        entries = [r[name] for _, r in results]
        failing = [{"index": i, "seed": seed} for i, (seed, r) in enumerate(results)
                   if not r[name]["pass"]]
        gating = entries[0].get("gating", True)
        t = {"test": name, "pass": (not failing) or not gating, "failures": failing}
        if "residual" in entries[0]:
            t["max_residual"] = max(e["residual"] for e in entries)
            t["tolerance"] = entries[0]["tolerance"] if name != "quadratic_variation_bound" \
                else "per-path (2p-1)^2 (M_n - m_n)/n"
        if "constant" in entries[0]:
            t["constant"] = entries[0]["constant"]
        if not gating:
            t["gating"] = False
        tests.append(t)
    return ExperimentReport("verify", config.echo(), tests)


def compare_tests(config: ExperimentConfig, overrides=None, label: str = "") -> list[dict]:
    params = config.params
    times = config.times
    wx, wm = walk_marginals(params, config.steps, times, config.samples, config.seed,
                            overrides, config.workers)
    lx, ls, used_grid = limit_marginals(params, times, config.samples, config.seed,
                                        config.grid_steps)
    # Lattice atoms of size ~1/sqrt(n) on the walk side, grid bias on the solver side.
    slack = 1.0 / math.sqrt(config.steps) + (GRID_SLACK if used_grid else 0.0)
    tests = []
    for i, t in enumerate(times):
        for what, a, b in (("X", wx[i], lx[i]), ("max", wm[i], ls[i])):
            r = ks_two_sample(a, b, config.significance, slack=slack)
            tests.append(r.as_dict(f"{label}ks_{what}_t={t:g}")
                         | {"limit": "dpbm_grid" if used_grid else "exact_one_sided"})
    return tests


@_timed
def cmd_compare(config: ExperimentConfig) -> ExperimentReport:
    """KS comparison of rescaled walk marginals with the scaling limit."""
    return ExperimentReport("compare", config.echo(),
                            compare_tests(config, config.overrides or None))


@_timed
def cmd_recurrence(config: ExperimentConfig) -> ExperimentReport:
    params = config.params

    def one(i):
        s = run_walk_streaming(params, config.steps, trajectory_seed(config.seed, i),
                               config.overrides or None)
        return s.returns, s.max, s.min

    res = np.array(parallel_map(one, config.samples, config.workers), dtype=np.int64)
    rep = summarize_recurrence(config.steps, res[:, 0], res[:, 1], res[:, 2])
    tests = [
        {"test": "returned_fraction", "value": rep.returned_fraction,
         "threshold": config.return_threshold,
         "pass": rep.returned_fraction >= config.return_threshold},
        {"test": "max_growth", "value": rep.max_ratio, "threshold": config.growth_threshold,
         "pass": rep.max_ratio <= config.growth_threshold},
        {"test": "min_growth", "value": rep.min_ratio, "threshold": config.growth_threshold,
         "pass": rep.min_ratio <= config.growth_threshold},
    ]
    report = ExperimentReport("recurrence", config.echo(), tests)
    report.config["summary"] = rep.as_dict()
    return report


@_timed
def cmd_perturb_robustness(config: ExperimentConfig, overrides=None) -> ExperimentReport:
    """Compare with and without pinned initial rotors; both must pass."""
    pins = dict(config.overrides if overrides is None else overrides)
    tests = compare_tests(config, None, "baseline_")
    tests += compare_tests(config, pins or None, "pinned_")
    return ExperimentReport("perturb", config.echo() | {"overrides": {str(k): v for k, v in
                                                                      sorted(pins.items())}},
                            tests)


def dump_limit_samples(config: ExperimentConfig, out_dir) -> list[Path]:
    """Endpoint samples of the scaled limit at each marginal time, with sidecars."""
    lx, _, used_grid = limit_marginals(config.params, config.times, config.samples,
                                       config.seed, config.grid_steps)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, t in enumerate(config.times):
        path = out / f"limit_t={t:g}.csv"
        write_samples(lx[i], path, {"params": config.params.as_dict(), "t": t,
                                    "seed": config.seed, "grid_steps": config.grid_steps,
                                    "method": "dpbm_grid" if used_grid else "exact_one_sided"})
        paths.append(path)
    return paths


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "compare": cmd_compare,
    "recurrence": cmd_recurrence,
    "perturb": cmd_perturb_robustness,
}
