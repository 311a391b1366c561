"""Rating-file parsing and conversion of average ratings into pairwise win probabilities."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .env import PreferenceMatrix
from .rng import derive_rng

JESTER_SENTINEL = 99.0
JESTER_MIN, JESTER_MAX = -10.0, 10.0
JESTER_COLUMNS = 101  # leading rated-count column + 100 joke ratings
MOVIELENS_HEADER = ("userId", "movieId", "rating", "timestamp")


class DatasetParseError(ValueError):
    """Malformed rating file; the message carries the offending row or line."""


@dataclass
class RatingsTable:
    """Per-item rating summaries, plus the raw values for histogram views."""

    items: list[int]
    avg_rating: np.ndarray
    n_ratings: np.ndarray
    values: list[np.ndarray] | None = None

    def __post_init__(self) -> None:
        if len(self.items) != len(self.avg_rating) or len(self.items) != len(self.n_ratings):
            raise ValueError("items, avg_rating, and n_ratings must align")
        if np.any(np.asarray(self.n_ratings) < 1):
            raise ValueError("every retained item needs at least one rating")

    def __len__(self) -> int:
        return len(self.items)


def load_jester(path: str | Path) -> RatingsTable:
    """Parse a Jester CSV: one row per user, column 1 = rated count, columns 2..101 = jokes.

    The literal 99 marks a missing rating; any other value outside [-10, 10]
    is rejected.  Jokes with no valid ratings are dropped with a warning.
    """
    sums = np.zeros(JESTER_COLUMNS - 1)
    counts = np.zeros(JESTER_COLUMNS - 1, dtype=np.int64)
    raw: list[list[float]] = [[] for _ in range(JESTER_COLUMNS - 1)]
    with open(path, newline="") as fh:
        for row_number, row in enumerate(csv.reader(fh), start=1):
            if len(row) != JESTER_COLUMNS:
                raise DatasetParseError(
                    f"row {row_number}: expected {JESTER_COLUMNS} columns, got {len(row)}"
                )
            try:
                ratings = [float(cell) for cell in row[1:]]
            except ValueError as exc:
                raise DatasetParseError(f"row {row_number}: non-numeric rating ({exc})") from exc
            for idx, value in enumerate(ratings):
                if value == JESTER_SENTINEL:
                    continue
                if not JESTER_MIN <= value <= JESTER_MAX:
                    raise DatasetParseError(
                        f"row {row_number}: rating {value} for joke {idx + 1} outside "
                        f"[{JESTER_MIN}, {JESTER_MAX}]"
                    )
                sums[idx] += value
                counts[idx] += 1
                raw[idx].append(value)
    kept = np.flatnonzero(counts > 0)
    dropped = np.flatnonzero(counts == 0)
    for idx in dropped:
        warnings.warn(f"joke {idx + 1} has no valid ratings; dropped")
    return RatingsTable(
        items=[int(idx) + 1 for idx in kept],
        avg_rating=sums[kept] / counts[kept],
        n_ratings=counts[kept],
        values=[np.asarray(raw[idx]) for idx in kept],
    )


_VALID_MOVIELENS = {x / 2 for x in range(1, 11)}


def load_movielens(path: str | Path) -> RatingsTable:
    """Parse a MovieLens ratings CSV (userId,movieId,rating,timestamp) into per-movie means."""
    stats: dict[int, list[float]] = {}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(cell.strip() for cell in header) != MOVIELENS_HEADER:
            raise DatasetParseError(
                f"missing or invalid header; expected {','.join(MOVIELENS_HEADER)}"
            )
        for line_number, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise DatasetParseError(f"line {line_number}: expected 4 fields, got {len(row)}")
            try:
                movie = int(row[1])
                rating = float(row[2])
            except ValueError as exc:
                raise DatasetParseError(f"line {line_number}: non-numeric field ({exc})") from exc
            if rating not in _VALID_MOVIELENS:
                raise DatasetParseError(
                    f"line {line_number}: rating {rating} not in 0.5..5.0 half-star steps"
                )
            stats.setdefault(movie, []).append(rating)
    items = sorted(stats)
    values = [np.asarray(stats[m]) for m in items]
    return RatingsTable(
        items=items,
        avg_rating=np.array([v.mean() for v in values]),
        n_ratings=np.array([len(v) for v in values], dtype=np.int64),
        values=values,
    )


def select_items(table: RatingsTable, dataset: str, k: int, seed: int = 0) -> RatingsTable:
    """Reduce a table to k items: a seeded random subset (jester) or top-k by count (movielens)."""
    if len(table) < k:
        raise ValueError(f"table has {len(table)} items, need {k}")
    if dataset == "jester":
        rng = derive_rng("jester-select", seed)
        chosen = np.sort(rng.choice(len(table), size=k, replace=False))
    elif dataset == "movielens":
        by_popularity = sorted(range(len(table)), key=lambda i: (-int(table.n_ratings[i]), table.items[i]))
        chosen = np.sort(np.asarray(by_popularity[:k]))
    else:
        raise ValueError(f"unknown dataset kind {dataset!r}")
    return RatingsTable(
        items=[table.items[i] for i in chosen],
        avg_rating=table.avg_rating[chosen],
        n_ratings=table.n_ratings[chosen],
        values=None if table.values is None else [table.values[i] for i in chosen],
    )


def ratings_to_preferences(table: RatingsTable, scale: float = 1.0) -> PreferenceMatrix:
    """Logistic link on average-rating differences; antisymmetry holds exactly.

    The upper triangle is computed and the lower triangle mirrored as its
    complement, so p[i][j] + p[j][i] == 1 to the bit.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    if len(table) < 2:
        raise ValueError("need at least 2 items")
    avg = np.asarray(table.avg_rating, dtype=float)
    diff = avg[:, None] - avg[None, :]
    upper = np.triu(1.0 / (1.0 + np.exp(-scale * diff)), k=1)
    p = np.full(diff.shape, 0.5)
    iu, ju = np.triu_indices(len(table), 1)
    p[iu, ju] = upper[iu, ju]
    p[ju, iu] = 1.0 - upper[iu, ju]
    return PreferenceMatrix(p)
