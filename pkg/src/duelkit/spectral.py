"""Rank Centrality: BTL score estimation via the stationary distribution of a win-fraction chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SMOOTHING = 1.0
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class NonErgodicChainError(ValueError):
    """Raised when unsmoothed counts leave the comparison chain reducible."""


@dataclass
class ComparisonCounts:
    """wins[i][j] = number of duels item i won against item j; zero diagonal."""

    wins: np.ndarray

    def __post_init__(self) -> None:
        wins = np.asarray(self.wins)
        if wins.ndim != 2 or wins.shape[0] != wins.shape[1] or wins.shape[0] < 2:
            raise ValueError("counts must be square with k >= 2")
        if not np.issubdtype(wins.dtype, np.integer):
            raise ValueError("counts must be integer")
        if np.any(wins < 0):
            raise ValueError("counts must be nonnegative")
        if np.any(np.diag(wins) != 0):
            raise ValueError("diagonal counts must be zero")
        self.wins = wins

    @classmethod
    def zeros(cls, k: int) -> "ComparisonCounts":
        return cls(np.zeros((k, k), dtype=np.int64))

    @property
    def k(self) -> int:
        return int(self.wins.shape[0])

    def record(self, winner: int, loser: int) -> None:
        if winner == loser:
            raise ValueError("winner and loser must differ")
        self.wins[winner, loser] += 1

    def total_duels(self) -> int:
        return int(self.wins.sum())

    def copy(self) -> "ComparisonCounts":
        return ComparisonCounts(self.wins.copy())


@dataclass(frozen=True)
class SpectralScores:
    """Stationary distribution over items plus power-iteration diagnostics."""

    pi: np.ndarray
    iterations: int
    converged: bool


def _transition_matrix(counts: ComparisonCounts, smoothing: float) -> np.ndarray:
    k = counts.k
    wins = counts.wins.astype(float)
    totals = wins + wins.T
    if smoothing == 0.0:
        unobserved = (totals == 0) & ~np.eye(k, dtype=bool)
        if np.any(unobserved):
            i, j = np.argwhere(unobserved)[0]
            raise NonErgodicChainError(
                f"pair ({i}, {j}) has no comparisons and smoothing is 0; chain may be reducible"
            )
    # hop i -> j with the smoothed fraction of duels j won against i, scaled by 1/k;
    # the diagonal denominator can be 0 when smoothing is, so pad it out of the division
    np.fill_diagonal(totals, 1.0)
    t = (wins.T + smoothing) / (totals + 2.0 * smoothing) / k
    np.fill_diagonal(t, 0.0)
    np.fill_diagonal(t, 1.0 - t.sum(axis=1))
    return t


def rank_centrality(
    counts: ComparisonCounts,
    smoothing: float = DEFAULT_SMOOTHING,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SpectralScores:
    """Stationary distribution of the smoothed comparison chain, by power iteration.

    Iteration starts from the uniform vector and stops once the L1 change
    drops to ``tol`` (or ``max_iter`` is hit, reported via ``converged``).
    ``smoothing`` is the additive count placed on both directions of every
    pair; the default of 1 keeps the chain ergodic at shoestring budgets
    where most pairs are never compared.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be >= 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    t = _transition_matrix(counts, smoothing)
    pi = np.full(counts.k, 1.0 / counts.k)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt = pi @ t
        change = float(np.abs(nxt - pi).sum())
        pi = nxt
        if change <= tol:
            converged = True
            break
    pi = pi / pi.sum()
    return SpectralScores(pi=pi, iterations=iterations, converged=converged)


def ranking_from_scores(scores: np.ndarray) -> np.ndarray:
    """Items sorted by descending score; equal scores fall back to ascending index."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1:
        raise ValueError("scores must be a 1-d vector")
    if np.any(np.isnan(s)):
        raise ValueError("scores contain NaN")
    return np.argsort(-s, kind="stable")
