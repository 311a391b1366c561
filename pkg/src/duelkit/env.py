"""Preference environments: Bradley-Terry instances, duel sampling, and the top-2 separation measure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import derive_rng

ANTISYMMETRY_TOL = 1e-12


def btl_probability(w_i: float, w_j: float) -> float:
    """Probability that an item of strength ``w_i`` beats one of strength ``w_j``."""
    if not (w_i > 0 and w_j > 0):
        raise ValueError(f"scores must be positive, got ({w_i}, {w_j})")
    return w_i / (w_i + w_j)


@dataclass(frozen=True)
class BtlScores:
    """Positive per-item strengths; win probabilities are scale-free ratios of these."""

    w: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.w, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("need a 1-d vector of at least 2 scores")
        if not np.all(np.isfinite(w)) or not np.all(w > 0):
            raise ValueError("scores must be positive and finite")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def k(self) -> int:
        return int(self.w.size)


@dataclass(frozen=True)
class PreferenceMatrix:
    """k x k win-probability matrix: p[i][j] is the chance item i beats item j."""

    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 2:
            raise ValueError("preference matrix must be square with k >= 2")
        if not np.all(np.diag(p) == 0.5):
            raise ValueError("diagonal must be exactly 0.5")
        off = ~np.eye(p.shape[0], dtype=bool)
        if not np.all((p[off] > 0.0) & (p[off] < 1.0)):
            raise ValueError("off-diagonal win probabilities must lie strictly in (0, 1)")
        if np.max(np.abs(p + p.T - 1.0)) > ANTISYMMETRY_TOL:
            raise ValueError("matrix violates p[i][j] + p[j][i] = 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return int(self.p.shape[0])


@dataclass(frozen=True)
class PreferenceEnvironment:
    """Immutable duel oracle: a preference matrix plus the ground-truth order.

    ``true_order`` sorts items by descending Borda strength (row sums of the
    matrix), ties broken by lowest index.  ``scores`` carries the generating
    strengths when the environment is synthetic, ``features`` an optional
    k x d matrix for contextual agents.
    """

    matrix: PreferenceMatrix
    true_order: np.ndarray
    features: np.ndarray | None
    label: str
    scores: np.ndarray | None = None

    def __post_init__(self) -> None:
        order = np.array(self.true_order, dtype=int)
        if sorted(order.tolist()) != list(range(self.matrix.k)):
            raise ValueError("true_order must be a permutation of 0..k-1")
        order.setflags(write=False)
        object.__setattr__(self, "true_order", order)
        if self.features is not None:
            feats = np.array(self.features, dtype=float)
            if feats.ndim != 2 or feats.shape[0] != self.matrix.k:
                raise ValueError("features must have exactly k rows")
            feats.setflags(write=False)
            object.__setattr__(self, "features", feats)

    @classmethod
    def from_matrix(
        cls,
        matrix: PreferenceMatrix,
        label: str,
        features: np.ndarray | None = None,
        scores: np.ndarray | None = None,
    ) -> "PreferenceEnvironment":
        strength = matrix.p.sum(axis=1)
        order = np.argsort(-strength, kind="stable")
        return cls(matrix=matrix, true_order=order, features=features, label=label, scores=scores)

    @property
    def k(self) -> int:
        return self.matrix.k

    @property
    def true_winner(self) -> int:
        return int(self.true_order[0])


def btl_matrix(scores: BtlScores) -> PreferenceMatrix:
    """Pairwise win probabilities implied by a strength vector."""
    w = scores.w
    p = w[:, None] / (w[:, None] + w[None, :])
    np.fill_diagonal(p, 0.5)
    return PreferenceMatrix(p)


def environment_from_scores(
    scores: BtlScores,
    label: str = "btl",
    features: np.ndarray | None = None,
) -> PreferenceEnvironment:
    return PreferenceEnvironment.from_matrix(
        btl_matrix(scores), label=label, features=features, scores=scores.w
    )


def generate_synthetic(k: int, d: int, seed: int) -> PreferenceEnvironment:
    """Sample a synthetic environment: log-normal strengths, standard-normal features.

    Strengths are exp of standard-normal draws, which keeps them strictly
    positive while preserving a normal generative core.  ``d = 0`` omits
    features entirely.  Pure function of ``(k, d, seed)``.
    """
    if k < 2:
        raise ValueError(f"need at least 2 items, got k={k}")
    if d < 0:
        raise ValueError(f"feature dimension must be >= 0, got {d}")
    rng = derive_rng("synthetic", k, d, seed)
    w = np.exp(rng.standard_normal(k))
    features = rng.standard_normal((k, d)) if d > 0 else None
    return environment_from_scores(BtlScores(w), label="synthetic", features=features)


def duel(env: PreferenceEnvironment, i: int, j: int, rng: np.random.Generator) -> int:
    """Sample one comparison outcome; consumes exactly one uniform draw."""
    k = env.k
    if not (0 <= i < k and 0 <= j < k):
        raise ValueError(f"items ({i}, {j}) out of range for k={k}")
    if i == j:
        raise ValueError(f"cannot duel item {i} against itself")
    return i if rng.random() < env.matrix.p[i, j] else j


def delta12(env: PreferenceEnvironment) -> float:
    """Squared separation (P_top1,top2 - 0.5)^2 between the two strongest items."""
    a, b = env.true_order[0], env.true_order[1]
    return float((env.matrix.p[a, b] - 0.5) ** 2)
