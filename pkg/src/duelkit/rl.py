"""Tabular Q-learning that swaps PARWiS disruption search for a learned challenger-rank policy.

The state is a coarse 40-cell digest of a run in progress (budget quartile,
bucketed top-2 spectral gap, whether the leader just changed); the action is
which rank in the current internal ranking to duel against the top item.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .agents import DuelObservation, ParwisAgent
from .env import PreferenceEnvironment, duel
from .rng import derive_rng
from .spectral import SpectralScores, ranking_from_scores

GAP_EDGES = (0.005, 0.02, 0.05, 0.1)
TERMINAL_BONUS = 10.0
QTABLE_HEADER = ("t_bucket", "gap_bucket", "top_changed", "challenger_rank", "q")


@dataclass(frozen=True)
class RlState:
    """Discrete run digest: 4 progress buckets x 5 gap buckets x leader-change flag."""

    t_bucket: int
    gap_bucket: int
    top_changed: bool

    def __post_init__(self) -> None:
        if not 0 <= self.t_bucket <= 3:
            raise ValueError("t_bucket out of range")
        if not 0 <= self.gap_bucket <= 4:
            raise ValueError("gap_bucket out of range")


def encode_state(t: int, budget: int, scores: SpectralScores, top_changed: bool) -> RlState:
    """Map the live run condition at duel ``t`` (1-based) onto one of the 40 states."""
    if not 1 <= t <= budget:
        raise ValueError(f"duel index {t} outside 1..{budget}")
    t_bucket = min(3, 4 * (t - 1) // budget)
    top2 = np.partition(scores.pi, -2)[-2:]
    gap = float(top2[1] - top2[0])
    gap_bucket = int(np.searchsorted(GAP_EDGES, gap, side="right"))
    return RlState(t_bucket=t_bucket, gap_bucket=gap_bucket, top_changed=bool(top_changed))


@dataclass
class QTable:
    """Sparse (state, challenger_rank) -> value map; unseen pairs read as 0."""

    k: int
    values: dict[tuple[RlState, int], float] = field(default_factory=dict)
    visits: dict[tuple[RlState, int], int] = field(default_factory=dict)

    @property
    def actions(self) -> range:
        return range(2, self.k + 1)

    def get(self, s: RlState, a: int) -> float:
        return self.values.get((s, a), 0.0)

    def best_action(self, s: RlState) -> int:
        best, best_value = 2, self.get(s, 2)
        for a in self.actions:
            v = self.get(s, a)
            if v > best_value:
                best, best_value = a, v
        return best

    def max_value(self, s: RlState) -> float:
        return max(self.get(s, a) for a in self.actions)

    def save_csv(self, path: str | Path) -> None:
        rows = sorted(
            (s.t_bucket, s.gap_bucket, int(s.top_changed), a, v)
            for (s, a), v in self.values.items()
        )
        with open(path, "w", newline="\n") as fh:
            writer = csv.writer(fh)
            writer.writerow(QTABLE_HEADER)
            writer.writerows(rows)

    @classmethod
    def load_csv(cls, path: str | Path, k: int) -> "QTable":
        table = cls(k=k)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != QTABLE_HEADER:
                raise ValueError(f"{path}: expected header {','.join(QTABLE_HEADER)}")
            for row in reader:
                tb, gb, tc, a, v = row
                state = RlState(int(tb), int(gb), bool(int(tc)))
                table.values[(state, int(a))] = float(v)
        return table


def q_update(
    q: QTable,
    s: RlState,
    a: int,
    r: float,
    s_next: RlState | None,
    alpha: float,
    gamma: float,
    terminal: bool = False,
) -> QTable:
    """Standard one-step Q-learning backup; terminal transitions bootstrap 0."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    bootstrap = 0.0 if terminal else q.max_value(s_next)
    key = (s, a)
    q.values[key] = q.get(s, a) + alpha * (r + gamma * bootstrap - q.get(s, a))
    q.visits[key] = q.visits.get(key, 0) + 1
    return q


def reward(obs: DuelObservation, true_winner: int, terminal: bool, recommended: int) -> float:
    """Negated per-step regret plus a terminal bonus for naming the true winner."""
    r = 0.0 if obs.winner == true_winner else -1.0
    if terminal and recommended == true_winner:
        r += TERMINAL_BONUS
    return r


def _choose_action(
    q: QTable, s: RlState, rng: np.random.Generator, greedy: bool, epsilon: float
) -> int:
    if not greedy and rng.random() < epsilon:
        return int(rng.integers(2, q.k + 1))
    return q.best_action(s)


def rl_select_pair(
    q: QTable,
    s: RlState,
    ranking: np.ndarray,
    rng: np.random.Generator,
    greedy: bool = True,
    epsilon: float = 0.0,
) -> tuple[int, int]:
    """Pair (top, ranked challenger): greedy argmax or epsilon-greedy over ranks."""
    action = _choose_action(q, s, rng, greedy, epsilon)
    return int(ranking[0]), int(ranking[action - 1])


class RlParwisAgent(ParwisAgent):
    """PARWiS skeleton whose challenger is chosen by a frozen (or exploring) Q-table."""

    name = "rl"

    def __init__(
        self,
        k: int,
        budget: int,
        qtable: QTable,
        rng: np.random.Generator,
        smoothing: float = 1.0,
        greedy: bool = True,
        epsilon: float = 0.0,
    ):
        super().__init__(k, rng, smoothing)
        if qtable.k != k:
            raise ValueError("Q-table was trained for a different item count")
        if budget < k - 1:
            raise ValueError(f"budget {budget} cannot cover the {k - 1} initialization duels")
        self._budget = budget
        self._q = qtable
        self._rng = rng
        self._greedy = greedy
        self._epsilon = epsilon
        self._top: int | None = None
        self.top_changed = False
        self.last_state: RlState | None = None
        self.last_action: int | None = None

    def current_state(self, t: int) -> RlState:
        return encode_state(t, self._budget, self._scores, self.top_changed)

    def _select_duel_pair(self, t: int) -> tuple[int, int]:
        s = self.current_state(t)
        action = _choose_action(self._q, s, self._rng, self._greedy, self._epsilon)
        self.last_state = s
        self.last_action = action
        ranking = ranking_from_scores(self._scores.pi)
        return int(ranking[0]), int(ranking[action - 1])

    def observe(self, obs: DuelObservation) -> None:
        previous = self._top
        super().observe(obs)
        new_top = int(np.argmax(self._scores.pi))
        self.top_changed = previous is not None and new_top != previous
        self._top = new_top


@dataclass(frozen=True)
class RlHyperparams:
    alpha: float = 0.1
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05


def _epsilon_at(episode: int, episodes: int, hyper: RlHyperparams) -> float:
    if episodes <= 1:
        return hyper.epsilon_end
    frac = episode / (episodes - 1)
    return hyper.epsilon_start + frac * (hyper.epsilon_end - hyper.epsilon_start)


def train_rl(
    env_sampler: Callable[[int], PreferenceEnvironment],
    episodes: int,
    budget: int,
    hyper: RlHyperparams = RlHyperparams(),
    seed: int = 0,
    smoothing: float = 1.0,
) -> QTable:
    """Run ``episodes`` budgeted episodes against sampled environments.

    Each episode replays the PARWiS skeleton (knockout initialization, spectral
    rescoring after every duel) but picks challengers epsilon-greedily from the
    table, annealing epsilon linearly across episodes.  Deterministic given
    ``seed`` and a deterministic sampler.
    """
    if episodes < 1:
        raise ValueError("need at least one training episode")
    q: QTable | None = None
    for episode in range(episodes):
        env = env_sampler(episode)
        if q is None:
            q = QTable(k=env.k)
        elif q.k != env.k:
            raise ValueError("environment size changed between episodes")
        epsilon = _epsilon_at(episode, episodes, hyper)
        agent_rng, duel_rng = derive_rng("rl-train", seed, episode).spawn(2)
        agent = RlParwisAgent(
            env.k, budget, q, agent_rng, smoothing, greedy=False, epsilon=epsilon
        )
        true_winner = env.true_winner
        for t in range(1, budget + 1):
            i, j = agent.select_pair(t)
            selecting = not agent.in_initialization
            winner = duel(env, i, j, duel_rng)
            obs = DuelObservation(i=i, j=j, winner=winner, t=t)
            agent.observe(obs)
            if not selecting:
                continue
            terminal = t == budget
            r = reward(obs, true_winner, terminal, recommended=agent.recommend())
            if terminal:
                q_update(q, agent.last_state, agent.last_action, r, None,
                         hyper.alpha, hyper.gamma, terminal=True)
            else:
                q_update(q, agent.last_state, agent.last_action, r,
                         agent.current_state(t + 1), hyper.alpha, hyper.gamma)
    return q
