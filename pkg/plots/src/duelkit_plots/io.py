"""CSV loading for the experiment outputs this package visualizes."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

TRAJECTORY_COLUMNS = {
    "dataset", "agent", "budget", "run", "duel",
    "cum_regret", "recovered", "true_rank", "reported_rank",
}


def require_file(path: str | Path, role: str) -> Path:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{role} file not found: {path}")
    return path


def load_trajectories(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(require_file(path, "trajectories"))
    missing = TRAJECTORY_COLUMNS - set(frame.columns)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    return frame


def load_preference_matrix(path: str | Path) -> np.ndarray:
    matrix = np.loadtxt(require_file(path, "preference matrix"), delimiter=",")
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"{path}: expected a square matrix")
    return matrix


def load_item_values(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(require_file(path, "item values"))
    if not {"item", "value"} <= set(frame.columns):
        raise ValueError(f"{path}: expected item,value columns")
    return frame


def load_deltas(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(require_file(path, "delta12"))
    if not {"dataset", "run", "delta12"} <= set(frame.columns):
        raise ValueError(f"{path}: expected dataset,run,delta12 columns")
    return frame
