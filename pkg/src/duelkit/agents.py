"""Duel-selection policies: Random, Double Thompson Sampling, PARWiS, and Contextual PARWiS.

Every agent implements the same four-method contract: ``select_pair`` proposes
the next duel, ``observe`` feeds back its outcome, ``recommend`` names the
current best-item guess, and ``internal_ranking`` exposes a full estimated
order for agents that maintain one (the PARWiS family) or ``None`` otherwise.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .spectral import (
    ComparisonCounts,
    SpectralScores,
    rank_centrality,
    ranking_from_scores,
)

DEFAULT_BLEND_ALPHA = 0.5
DEFAULT_LOGISTIC_LR = 0.1
DEFAULT_LOGISTIC_L2 = 0.01


class NotReadyError(RuntimeError):
    """Raised when a recommendation is requested before any duel was observed."""


@dataclass(frozen=True)
class DuelObservation:
    """Outcome of duel number ``t`` between items ``i`` and ``j``."""

    i: int
    j: int
    winner: int
    t: int

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise ValueError("a duel needs two distinct items")
        if self.winner not in (self.i, self.j):
            raise ValueError(f"winner {self.winner} is not one of ({self.i}, {self.j})")

    @property
    def loser(self) -> int:
        return self.j if self.winner == self.i else self.i


class Agent(ABC):
    """Common interface the experiment runner drives."""

    name: str = "agent"
    init_duels: int = 0

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("need at least 2 items")
        self.k = k

    @abstractmethod
    def select_pair(self, t: int) -> tuple[int, int]: ...

    @abstractmethod
    def observe(self, obs: DuelObservation) -> None: ...

    @abstractmethod
    def recommend(self) -> int: ...

    def internal_ranking(self) -> np.ndarray | None:
        return None


# --- random baseline ---------------------------------------------------------


def random_select_pair(k: int, rng: np.random.Generator) -> tuple[int, int]:
    """Uniform draw over unordered pairs, order within the pair randomized."""
    if k < 2:
        raise ValueError("need at least 2 items")
    i, j = rng.choice(k, size=2, replace=False)
    return int(i), int(j)


class RandomAgent(Agent):
    name = "random"

    def __init__(self, k: int, rng: np.random.Generator):
        super().__init__(k)
        self._rng = rng
        # recommendations draw from their own stream so recording frequency
        # never perturbs the pair-selection sequence
        self._recommend_rng = rng.spawn(1)[0]
        self._n_obs = 0

    def select_pair(self, t: int) -> tuple[int, int]:
        return random_select_pair(self.k, self._rng)

    def observe(self, obs: DuelObservation) -> None:
        self._n_obs += 1

    def recommend(self) -> int:
        if self._n_obs == 0:
            raise NotReadyError("no duels observed yet")
        return int(self._recommend_rng.integers(self.k))


# --- Double Thompson Sampling ------------------------------------------------


@dataclass
class BetaPosteriorGrid:
    """Beta(a, b) posterior per ordered pair; a[i][j] mirrors b[j][i]."""

    a: np.ndarray
    b: np.ndarray

    @classmethod
    def uniform(cls, k: int) -> "BetaPosteriorGrid":
        return cls(a=np.ones((k, k)), b=np.ones((k, k)))

    @property
    def k(self) -> int:
        return int(self.a.shape[0])

    def means(self) -> np.ndarray:
        return self.a / (self.a + self.b)


def dts_select_pair(grid: BetaPosteriorGrid, rng: np.random.Generator) -> tuple[int, int]:
    """Two Thompson steps: Copeland winner of sampled preferences, then best rival."""
    k = grid.k
    iu, ju = np.triu_indices(k, 1)
    theta = np.full((k, k), 0.5)
    draws = rng.beta(grid.a[iu, ju], grid.b[iu, ju])
    theta[iu, ju] = draws
    theta[ju, iu] = 1.0 - draws
    copeland = (theta > 0.5).sum(axis=1)
    first = int(np.argmax(copeland))
    others = np.delete(np.arange(k), first)
    phi = rng.beta(grid.a[others, first], grid.b[others, first])
    second = int(others[np.argmax(phi)])
    return first, second


def dts_observe(grid: BetaPosteriorGrid, obs: DuelObservation) -> BetaPosteriorGrid:
    """Conjugate update: one more win for the winner over the loser."""
    grid.a[obs.winner, obs.loser] += 1.0
    grid.b[obs.loser, obs.winner] += 1.0
    return grid


def dts_recommend(grid: BetaPosteriorGrid) -> int:
    """Copeland winner of the posterior-mean matrix.

    Ties fall back to the largest sum of posterior means, then lowest index.
    """
    means = grid.means()
    off = ~np.eye(grid.k, dtype=bool)
    beats = ((means > 0.5) & off).sum(axis=1)
    best = np.flatnonzero(beats == beats.max())
    if best.size == 1:
        return int(best[0])
    strength = (means * off).sum(axis=1)
    return int(best[np.argmax(strength[best])])


class DoubleThompsonSamplingAgent(Agent):
    name = "dts"

    def __init__(self, k: int, rng: np.random.Generator):
        super().__init__(k)
        self._rng = rng
        self._grid = BetaPosteriorGrid.uniform(k)
        self._n_obs = 0

    @property
    def grid(self) -> BetaPosteriorGrid:
        return self._grid

    def select_pair(self, t: int) -> tuple[int, int]:
        return dts_select_pair(self._grid, self._rng)

    def observe(self, obs: DuelObservation) -> None:
        dts_observe(self._grid, obs)
        self._n_obs += 1

    def recommend(self) -> int:
        if self._n_obs == 0:
            raise NotReadyError("no duels observed yet")
        return dts_recommend(self._grid)


# --- PARWiS ------------------------------------------------------------------


@dataclass(frozen=True)
class DisruptionScore:
    challenger: int
    value: float


class KnockoutSchedule:
    """k-1 initialization duels: the standing winner meets each unseen item in turn.

    The visit order is a uniformly random permutation, so the resulting
    comparison multigraph is connected regardless of outcomes.
    """

    def __init__(self, k: int, rng: np.random.Generator):
        if k < 2:
            raise ValueError("need at least 2 items")
        self.order = rng.permutation(k)
        self._carry = int(self.order[0])
        self._next_entrant = 1

    @property
    def done(self) -> bool:
        return self._next_entrant >= len(self.order)

    def next_pair(self) -> tuple[int, int]:
        if self.done:
            raise RuntimeError("initialization schedule exhausted")
        return self._carry, int(self.order[self._next_entrant])

    def record(self, winner: int) -> None:
        self._carry = winner
        self._next_entrant += 1


def parwis_disruption(
    scores: SpectralScores,
    counts: ComparisonCounts,
    top: int,
    challenger: int,
    smoothing: float = 1.0,
) -> DisruptionScore:
    """How much a hypothetical challenger win would flip the top of the ranking.

    The value is the plug-in upset probability times the positive stationary
    score gap the challenger would open over the current top after one extra
    win is credited to it.
    """
    if challenger == top:
        raise ValueError("challenger must differ from the current top item")
    if int(np.argmax(scores.pi)) != top:
        raise ValueError("top must be the argmax of the current scores")
    p_upset = scores.pi[challenger] / (scores.pi[challenger] + scores.pi[top])
    trial = counts.copy()
    trial.record(challenger, top)
    pi_after = rank_centrality(trial, smoothing).pi
    gap = max(0.0, float(pi_after[challenger] - pi_after[top]))
    return DisruptionScore(challenger=challenger, value=float(p_upset) * gap)


def _select_challenger(scores, counts, smoothing, upset_probability) -> tuple[int, int]:
    k = counts.k
    top = int(np.argmax(scores.pi))
    values = np.full(k, -np.inf)
    for c in range(k):
        if c == top:
            continue
        trial = counts.copy()
        trial.record(c, top)
        pi_after = rank_centrality(trial, smoothing).pi
        gap = max(0.0, float(pi_after[c] - pi_after[top]))
        values[c] = upset_probability(c, top) * gap
    if values.max() <= 0.0:
        # nothing would shift the top; probe the runner-up instead
        challenger = int(ranking_from_scores(scores.pi)[1])
    else:
        challenger = int(np.argmax(values))
    return top, challenger


def parwis_select_pair(
    scores: SpectralScores, counts: ComparisonCounts, smoothing: float = 1.0
) -> tuple[int, int]:
    """Duel the current top item against the most disruptive challenger."""

    def spectral_upset(c: int, top: int) -> float:
        return float(scores.pi[c] / (scores.pi[c] + scores.pi[top]))

    return _select_challenger(scores, counts, smoothing, spectral_upset)


def parwis_recommend(scores: SpectralScores | None) -> int:
    if scores is None:
        raise NotReadyError("no duels observed yet")
    return int(np.argmax(scores.pi))


class ParwisAgent(Agent):
    """Knockout initialization, spectral scoring, disruption-driven selection."""

    name = "parwis"

    def __init__(self, k: int, rng: np.random.Generator, smoothing: float = 1.0):
        super().__init__(k)
        self.init_duels = k - 1
        self.smoothing = smoothing
        self._schedule = KnockoutSchedule(k, rng)
        self._counts = ComparisonCounts.zeros(k)
        self._scores: SpectralScores | None = None
        self._n_obs = 0

    @property
    def counts(self) -> ComparisonCounts:
        return self._counts

    @property
    def scores(self) -> SpectralScores | None:
        return self._scores

    @property
    def in_initialization(self) -> bool:
        return self._n_obs < self.init_duels

    def select_pair(self, t: int) -> tuple[int, int]:
        if self.in_initialization:
            return self._schedule.next_pair()
        return self._select_duel_pair(t)

    def _select_duel_pair(self, t: int) -> tuple[int, int]:
        return parwis_select_pair(self._scores, self._counts, self.smoothing)

    def observe(self, obs: DuelObservation) -> None:
        self._counts.record(obs.winner, obs.loser)
        if self.in_initialization:
            self._schedule.record(obs.winner)
        self._n_obs += 1
        # scores are rebuilt from scratch after every duel; cheap at k ~ 20
        self._scores = rank_centrality(self._counts, self.smoothing)

    def recommend(self) -> int:
        return parwis_recommend(self._scores)

    def internal_ranking(self) -> np.ndarray | None:
        if self._scores is None:
            return None
        return ranking_from_scores(self._scores.pi)


# --- Contextual PARWiS -------------------------------------------------------


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    ez = np.exp(z)
    return float(ez / (1.0 + ez))


def contextual_predict(theta: np.ndarray, x_i: np.ndarray, x_j: np.ndarray) -> float:
    """Logistic win probability for item i over item j from the feature difference."""
    theta = np.asarray(theta, dtype=float)
    x_i = np.asarray(x_i, dtype=float)
    x_j = np.asarray(x_j, dtype=float)
    if theta.shape != x_i.shape or x_i.shape != x_j.shape:
        raise ValueError("theta and feature vectors must share one dimension")
    return _sigmoid(float(theta @ (x_i - x_j)))


def contextual_update(
    theta: np.ndarray,
    x_i: np.ndarray,
    x_j: np.ndarray,
    outcome: float,
    lr: float = DEFAULT_LOGISTIC_LR,
    l2: float = DEFAULT_LOGISTIC_L2,
) -> np.ndarray:
    """One SGD step on L2-regularized log-loss; ``outcome`` is 1 if i won, else 0."""
    p = contextual_predict(theta, x_i, x_j)
    return theta + lr * ((outcome - p) * (np.asarray(x_i) - np.asarray(x_j)) - l2 * np.asarray(theta))


def contextual_parwis_select_pair(
    scores: SpectralScores,
    counts: ComparisonCounts,
    theta: np.ndarray | None,
    features: np.ndarray | None,
    smoothing: float = 1.0,
    alpha: float = DEFAULT_BLEND_ALPHA,
) -> tuple[int, int]:
    """PARWiS selection with the upset probability blended against a logistic model.

    Without features this is exactly ``parwis_select_pair``.
    """
    if features is None:
        return parwis_select_pair(scores, counts, smoothing)

    def blended_upset(c: int, top: int) -> float:
        p_spectral = float(scores.pi[c] / (scores.pi[c] + scores.pi[top]))
        p_logistic = contextual_predict(theta, features[c], features[top])
        return alpha * p_spectral + (1.0 - alpha) * p_logistic

    return _select_challenger(scores, counts, smoothing, blended_upset)


class ContextualParwisAgent(ParwisAgent):
    """PARWiS with a logistic feature model folded into the disruption scores.

    Features feed selection only: initialization duels neither read nor train
    the model, and with no features at all the agent replays plain PARWiS
    draw for draw.
    """

    name = "contextual"

    def __init__(
        self,
        k: int,
        rng: np.random.Generator,
        features: np.ndarray | None = None,
        smoothing: float = 1.0,
        alpha: float = DEFAULT_BLEND_ALPHA,
        lr: float = DEFAULT_LOGISTIC_LR,
        l2: float = DEFAULT_LOGISTIC_L2,
    ):
        super().__init__(k, rng, smoothing)
        if features is not None:
            features = np.asarray(features, dtype=float)
            if features.shape[0] != k:
                raise ValueError("features must have exactly k rows")
        self.features = features
        self.alpha = alpha
        self.lr = lr
        self.l2 = l2
        self.theta = np.zeros(features.shape[1]) if features is not None else None

    def _select_duel_pair(self, t: int) -> tuple[int, int]:
        return contextual_parwis_select_pair(
            self._scores, self._counts, self.theta, self.features, self.smoothing, self.alpha
        )

    def observe(self, obs: DuelObservation) -> None:
        was_selecting = not self.in_initialization
        super().observe(obs)
        if self.features is not None and was_selecting:
            outcome = 1.0 if obs.winner == obs.i else 0.0
            self.theta = contextual_update(
                self.theta, self.features[obs.i], self.features[obs.j], outcome, self.lr, self.l2
            )
