from __future__ import annotations

import csv

import numpy as np
import pytest

from duelkit.rng import derive_rng


def write_jester_csv(path, ratings: np.ndarray) -> None:
    """ratings: users x 100 array with 99.0 marking missing entries."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in ratings:
            rated = int(np.sum(row != 99.0))
            writer.writerow([rated] + [f"{v:g}" for v in row])


def write_movielens_csv(path, rows: list[tuple[int, int, float, int]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["userId", "movieId", "rating", "timestamp"])
        for user, movie, rating, ts in rows:
            writer.writerow([user, movie, f"{rating:g}", ts])


@pytest.fixture
def jester_file(tmp_path):
    """40 users x 100 jokes with a deterministic missing pattern."""
    rng = derive_rng("fixture-jester")
    ratings = np.round(rng.uniform(-10, 10, size=(40, 100)), 2)
    missing = rng.random((40, 100)) < 0.3
    ratings[missing] = 99.0
    path = tmp_path / "jester.csv"
    write_jester_csv(path, ratings)
    return path


@pytest.fixture
def movielens_file(tmp_path):
    """30 movies with distinct rating counts so top-k selection is unambiguous."""
    rng = derive_rng("fixture-movielens")
    rows = []
    user = 0
    for movie in range(1, 31):
        n = 5 + movie  # movie 30 is the most rated
        for _ in range(n):
            user += 1
            rating = float(rng.integers(1, 11)) / 2.0
            rows.append((user, movie, rating, 1000000 + user))
    path = tmp_path / "movielens.csv"
    write_movielens_csv(path, rows)
    return path
