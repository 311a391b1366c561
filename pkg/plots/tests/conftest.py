from __future__ import annotations

import csv

import numpy as np
import pytest

AGENTS = ("random", "dts", "parwis", "contextual", "rl")
FAMILY = ("parwis", "contextual", "rl")


def write_trajectories(path, datasets=("synthetic",), budgets=(6, 8), runs=3,
                       agents=AGENTS, constant_metric=False):
    rng = np.random.default_rng(7)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["dataset", "agent", "budget", "run", "duel",
             "cum_regret", "recovered", "true_rank", "reported_rank"]
        )
        for dataset in datasets:
            for agent in agents:
                for budget in budgets:
                    for run in range(runs):
                        regret = 0
                        for duel in range(1, budget + 1):
                            regret += 0 if constant_metric else int(rng.random() < 0.6)
                            recovered = 1 if constant_metric else int(rng.random() < 0.3)
                            true_rank = 1 if constant_metric else int(rng.integers(1, 7))
                            reported = "" if agent not in FAMILY else (
                                1 if constant_metric else int(rng.integers(1, 7))
                            )
                            writer.writerow(
                                [dataset, agent, budget, run, duel,
                                 regret, recovered, true_rank, reported]
                            )
    return path


def write_matrix(path, k=5):
    rng = np.random.default_rng(3)
    p = np.full((k, k), 0.5)
    for i in range(k):
        for j in range(i + 1, k):
            p[i, j] = rng.uniform(0.1, 0.9)
            p[j, i] = 1.0 - p[i, j]
    np.savetxt(path, p, delimiter=",")
    return path


def write_values(path, values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item", "value"])
        for idx, value in enumerate(values):
            writer.writerow([idx, value])
    return path


def write_deltas(path, deltas, dataset="synthetic"):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "run", "delta12"])
        for run, value in enumerate(deltas):
            writer.writerow([dataset, run, value])
    return path


@pytest.fixture
def results_dir(tmp_path):
    """A synthetic-run output directory with all six CSVs."""
    write_trajectories(tmp_path / "trajectories.csv")
    write_matrix(tmp_path / "preference_matrix.csv")
    write_values(tmp_path / "ratings.csv", np.random.default_rng(5).lognormal(size=20))
    write_deltas(tmp_path / "delta12.csv", [0.01, 0.02, 0.05])
    return tmp_path
