"""CSV/JSON formats for trajectories, limit paths, samples and override sets.

Trajectory files start with one ``# {json}`` line holding params and seed,
followed by a CSV table with columns ``n,X,M,m,coin,rotor,new_max,new_min,fresh``.
Row n carries X_n, M_n, m_n and the record of step n (the move from X_n);
the last row has empty step fields.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .limit import LimitPath
from .params import WalkParams
from .walk import Trajectory

TRAJECTORY_COLUMNS = ["n", "X", "M", "m", "coin", "rotor", "new_max", "new_min", "fresh"]
PATH_COLUMNS = ["k", "t", "B", "X", "sup", "inf"]


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def trajectory_header(traj: Trajectory, **extra) -> dict:
    return {"params": traj.params.as_dict(), "seed": traj.seed, "n_steps": traj.n_steps,
            "overrides": {str(k): v for k, v in sorted(traj.overrides.items())}, **extra}


def write_trajectory_csv(traj: Trajectory, path, **extra) -> None:
    path = Path(path)
    nmax, nmin = traj.new_max, traj.new_min
    with path.open("w", newline="") as fh:
        fh.write("# " + json.dumps(trajectory_header(traj, **extra), sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        N = traj.n_steps
        for k in range(N + 1):
            row = [k, int(traj.positions[k]), int(traj.running_max[k]), int(traj.running_min[k])]
            if k < N:
                row += [int(traj.coins[k]), int(traj.rotors[k]), int(nmax[k]),
                        int(nmin[k]), int(traj.fresh[k])]
            else:
                row += [""] * 5
            w.writerow(row)


def read_trajectory_csv(path) -> Trajectory:
    path = Path(path)
    with path.open(newline="") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing JSON header line")
        header = json.loads(first[2:])
        rows = list(csv.DictReader(fh))
    if not rows or list(rows[0].keys()) != TRAJECTORY_COLUMNS:
        raise ValueError(f"{path}: unexpected columns")
    steps = rows[:-1]
    p = header["params"]
    return Trajectory(
        params=WalkParams(p["p"], p["alpha"], p["beta"], allow_degenerate=True),
        seed=header["seed"],
        positions=np.array([int(r["X"]) for r in rows], dtype=np.int64),
        coins=np.array([int(r["coin"]) for r in steps], dtype=np.int8),
        rotors=np.array([int(r["rotor"]) for r in steps], dtype=np.int8),
        fresh=np.array([r["fresh"] == "1" for r in steps], dtype=np.bool_),
        overrides={int(k): v for k, v in header.get("overrides", {}).items()},
    )


def write_limit_path_csv(path_obj: LimitPath, path) -> None:
    times = (path_obj.grid.times if path_obj.grid is not None
             else np.arange(len(path_obj.solved), dtype=np.float64))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PATH_COLUMNS)
        for k in range(len(path_obj.solved)):
            w.writerow([k, repr(float(times[k])), repr(float(path_obj.brownian[k])),
                        repr(float(path_obj.solved[k])), repr(float(path_obj.sup[k])),
                        repr(float(path_obj.inf[k]))])


def write_samples(values, path, meta: dict) -> None:
    """Single-column CSV of samples plus a ``<name>.json`` parameter sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write("value\n")
        for v in np.asarray(values, dtype=np.float64).ravel():
            fh.write(repr(float(v)) + "\n")
    path.with_suffix(".json").write_text(dumps_json(meta))


def read_samples(path) -> np.ndarray:
    return np.loadtxt(path, skiprows=1, ndmin=1)


def read_overrides(path) -> dict[int, int]:
    """CSV of (site, rotor) rows; a header row is optional."""
    pins: dict[int, int] = {}
    with Path(path).open(newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                site, rotor = int(row[0]), int(row[1])
            except ValueError:
                if i == 0:
                    continue
                raise ValueError(f"{path}: bad override row {row!r}") from None
            if rotor not in (-1, 1):
                raise ValueError(f"{path}: rotor at site {site} must be +1 or -1")
            pins[site] = rotor
    return pins
