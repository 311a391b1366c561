"""Per-duel trajectory records and the four evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .agents import DuelObservation


@dataclass(frozen=True)
class RunTrajectory:
    """Everything recorded over one run: per-duel arrays of length ``budget``."""

    agent: str
    budget: int
    seed: int
    cumulative_regret: np.ndarray
    recommended_item: np.ndarray
    true_rank_of_reported: np.ndarray
    reported_rank_of_true: np.ndarray | None

    def __post_init__(self) -> None:
        for name in ("cumulative_regret", "recommended_item", "true_rank_of_reported"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != (self.budget,):
                raise ValueError(f"{name} must have length {self.budget}, got {arr.shape}")
        if self.reported_rank_of_true is not None and len(self.reported_rank_of_true) != self.budget:
            raise ValueError("reported_rank_of_true must match the budget when present")
        regret = np.asarray(self.cumulative_regret)
        if np.any(np.diff(regret) < 0) or regret[0] < 0:
            raise ValueError("cumulative regret must be non-decreasing and nonnegative")
        if np.any(regret > np.arange(1, self.budget + 1)):
            raise ValueError("cumulative regret cannot exceed the duel index")

    @property
    def final_recommendation(self) -> int:
        return int(self.recommended_item[-1])


def regret_increment(obs: DuelObservation, true_winner: int) -> int:
    """1 when a non-optimal item won the duel, else 0."""
    return 0 if obs.winner == true_winner else 1


def recovery_fraction(runs: Sequence[RunTrajectory], true_winner: int) -> float:
    """Fraction of runs whose final recommendation is the true winner."""
    if not runs:
        raise ValueError("need at least one run")
    hits = sum(1 for run in runs if run.final_recommendation == true_winner)
    return hits / len(runs)


def true_rank_of(item: int, true_order: np.ndarray) -> int:
    """1-based position of ``item`` in the ground-truth ordering."""
    pos = np.flatnonzero(np.asarray(true_order) == item)
    if pos.size == 0:
        raise ValueError(f"item {item} not present in the ordering")
    return int(pos[0]) + 1


def reported_rank_of_true(true_winner: int, internal_ranking: np.ndarray | None) -> int | None:
    """1-based rank the agent assigns the true winner; None for agents without a ranking."""
    if internal_ranking is None:
        return None
    return true_rank_of(true_winner, internal_ranking)
