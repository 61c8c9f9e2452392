"""Snapshot CSVs (``x,h,u,E,active`` at quadrature points) and the JSON summary."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .assembly import ProblemSetup, SolutionState

SNAPSHOT_COLUMNS = ("x", "h", "u", "E", "active")


def snapshot_table(state: SolutionState, setup: ProblemSetup) -> np.ndarray:
    """Rows of (x, h, u, E, active) at every quadrature point, ordered by x."""
    B = setup.bases
    x = setup.mesh.physical_points(B["h"].quad_nodes).ravel()
    h = state.h.at_quadrature(B["h"]).ravel()
    u = state.u.at_quadrature(B["u"]).ravel()
    E = state.E.at_quadrature(B["E"]).ravel()
    active = (np.abs(E) - setup.params.sigma0 / setup.reg.gamma >= 0.0).astype(float)
    return np.column_stack([x, h, u, E, active])


def write_snapshot(path: str | Path, state: SolutionState, setup: ProblemSetup) -> Path:
    path = Path(path)
    rows = snapshot_table(state, setup)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_COLUMNS)
        for x, h, u, E, a in rows:
            w.writerow([repr(float(x)), repr(float(h)), repr(float(u)), repr(float(E)), int(a)])
    return path


def read_snapshot(path: str | Path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != SNAPSHOT_COLUMNS:
            raise ValueError(f"unexpected snapshot header {header}")
        return np.array([[float(v) for v in row] for row in r])


def write_summary(path: str | Path, summary: dict) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return path
