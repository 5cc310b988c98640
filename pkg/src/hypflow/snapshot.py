"""Field snapshots: CSV of node values plus a JSON sidecar describing the grid.

Doubles are written with repr(), the shortest string that round-trips, so a
load after save reproduces every value bit for bit.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .fields import PolarGrid


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_suffix(".json")


def save_snapshot(csv_path, grid: PolarGrid, components: dict[str, np.ndarray], extra: dict | None = None) -> None:
    names = list(components)
    for name in names:
        if np.shape(components[name]) != grid.shape:
            raise ValueError(f"component {name!r} has shape {np.shape(components[name])}, grid is {grid.shape}")
        if name in ("r", "theta"):
            raise ValueError("component names 'r' and 'theta' are reserved")
    p = Path(csv_path)
    p.parent.mkdir(parents=True, exist_ok=True)
    r = np.repeat(grid.r[:, None], grid.n_theta, axis=1)
    cols = [r, grid.theta_mesh] + [np.asarray(components[n], dtype=float) for n in names]
    with p.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "theta", *names])
        for i in range(grid.n_r):
            for j in range(grid.n_theta):
                w.writerow([repr(float(c[i, j])) for c in cols])
    meta = dict(grid.describe())
    if extra:
        meta["extra"] = extra
    sidecar_path(p).write_text(json.dumps(meta, indent=2))


def load_snapshot(csv_path) -> tuple[PolarGrid, dict[str, np.ndarray]]:
    p = Path(csv_path)
    meta = json.loads(sidecar_path(p).read_text())
    grid = PolarGrid(float(meta["a"]), float(meta["r_in"]), float(meta["r_out"]), int(meta["n_r"]), int(meta["n_theta"]))
    with p.open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[:2] != ["r", "theta"]:
        raise ValueError("snapshot header must start with r,theta")
    if len(body) != grid.n_r * grid.n_theta:
        raise ValueError(f"expected {grid.n_r * grid.n_theta} rows, found {len(body)}")
    data = np.array([[float(x) for x in row] for row in body]).reshape(grid.n_r, grid.n_theta, len(header))
    return grid, {name: data[:, :, k].copy() for k, name in enumerate(header) if k >= 2}


def load_extra(csv_path) -> dict:
    """Extra metadata stored in the sidecar, empty when absent."""
    return json.loads(sidecar_path(csv_path).read_text()).get("extra", {})
