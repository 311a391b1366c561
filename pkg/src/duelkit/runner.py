"""Experiment orchestration: config, seeding, budget loops, aggregation, CSV emission."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .agents import (
    Agent,
    ContextualParwisAgent,
    DoubleThompsonSamplingAgent,
    DuelObservation,
    ParwisAgent,
    RandomAgent,
)
from .datasets import RatingsTable, load_jester, load_movielens, ratings_to_preferences, select_items
from .env import PreferenceEnvironment, delta12, duel, generate_synthetic
from .metrics import (
    RunTrajectory,
    recovery_fraction,
    regret_increment,
    reported_rank_of_true,
    true_rank_of,
)
from .rl import QTable, RlHyperparams, RlParwisAgent, train_rl
from .rng import derive_rng, stable_seed
from .stats import welch_t_test

AGENT_NAMES = ("random", "dts", "parwis", "contextual", "rl")
PARWIS_FAMILY = ("parwis", "contextual", "rl")
DATASETS = ("synthetic", "jester", "movielens")
TTEST_METRICS = ("recovery", "cum_regret", "true_rank")

TRAJECTORIES_HEADER = (
    "dataset", "agent", "budget", "run", "duel",
    "cum_regret", "recovered", "true_rank", "reported_rank",
)
SUMMARY_HEADER = (
    "dataset", "agent", "budget", "recovery_fraction", "mean_true_rank",
    "mean_reported_rank", "mean_cum_regret", "failure_rate",
    "avg_true_rank_on_failure", "delta12_mean", "delta12_std",
)
TTESTS_HEADER = ("dataset", "budget", "agent_a", "agent_b", "metric", "t_stat", "p_value", "df")


@dataclass(frozen=True)
class RlTrainConfig:
    episodes: int = 5000
    alpha: float = 0.1
    gamma: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05

    def hyperparams(self) -> RlHyperparams:
        return RlHyperparams(
            alpha=self.alpha,
            gamma=self.gamma,
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "synthetic"
    dataset_path: str | None = None
    k: int = 20
    budgets: tuple[int, ...] = (40, 60, 80)
    runs: int = 30
    seed: int = 0
    agents: tuple[str, ...] = AGENT_NAMES
    rl: RlTrainConfig = field(default_factory=RlTrainConfig)
    logistic_scale: float = 1.0
    smoothing: float = 1.0
    feature_dim: int = 5
    output_dir: str = "results"
    workers: int = 1

    def validate(self) -> None:
        if self.dataset not in DATASETS:
            raise ValueError(f"unknown dataset {self.dataset!r}; valid: {', '.join(DATASETS)}")
        if self.dataset != "synthetic" and not self.dataset_path:
            raise ValueError(f"dataset {self.dataset!r} needs --data-path")
        unknown = [a for a in self.agents if a not in AGENT_NAMES]
        if unknown:
            raise ValueError(
                f"unknown agent(s) {', '.join(unknown)}; valid: {', '.join(AGENT_NAMES)}"
            )
        if not self.agents:
            raise ValueError("need at least one agent")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if any(b < 1 for b in self.budgets) or not self.budgets:
            raise ValueError("budgets must be positive")
        if any(a in PARWIS_FAMILY for a in self.agents):
            short = [b for b in self.budgets if b < self.k - 1]
            if short:
                raise ValueError(
                    f"budgets {short} are below the k-1={self.k - 1} initialization duels "
                    "required by PARWiS-family agents"
                )
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def ordered_agents(self) -> tuple[str, ...]:
        return tuple(a for a in AGENT_NAMES if a in self.agents)


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    agent: str
    budget: int
    run: int
    trajectory: RunTrajectory
    delta12: float
    true_winner: int


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    agent: str
    budget: int
    recovery_fraction: float
    mean_true_rank: float
    mean_reported_rank: float | None
    mean_cum_regret: float
    failure_rate: float
    avg_true_rank_on_failure: float | None
    delta12_mean: float
    delta12_std: float


@dataclass(frozen=True)
class TTestRow:
    dataset: str
    budget: int
    agent_a: str
    agent_b: str
    metric: str
    t_stat: float
    p_value: float
    df: float


@dataclass
class ResultsTable:
    """All per-duel rows plus derived aggregates for one experiment."""

    records: list[RunRecord]
    environment: PreferenceEnvironment | None = None
    ratings: RatingsTable | None = None

    def group(self, agent: str, budget: int) -> list[RunRecord]:
        return [r for r in self.records if r.agent == agent and r.budget == budget]

    def agents(self) -> list[str]:
        seen = [r.agent for r in self.records]
        return [a for a in AGENT_NAMES if a in seen]

    def budgets(self) -> list[int]:
        return sorted({r.budget for r in self.records})

    def aggregates(self) -> list[SummaryRow]:
        rows = []
        for agent in self.agents():
            for budget in self.budgets():
                group = self.group(agent, budget)
                if not group:
                    continue
                rows.append(_summarize_group(group))
        return rows

    def ttests(self) -> list[TTestRow]:
        rows = []
        agents = self.agents()
        for budget in self.budgets():
            for ia, agent_a in enumerate(agents):
                for agent_b in agents[ia + 1:]:
                    ga, gb = self.group(agent_a, budget), self.group(agent_b, budget)
                    if len(ga) < 2 or len(gb) < 2:
                        continue
                    for metric in TTEST_METRICS:
                        result = welch_t_test(_metric_vector(ga, metric), _metric_vector(gb, metric))
                        rows.append(TTestRow(
                            dataset=ga[0].dataset, budget=budget,
                            agent_a=agent_a, agent_b=agent_b, metric=metric,
                            t_stat=result.t_stat, p_value=result.p_value, df=result.df,
                        ))
        return rows


def _metric_vector(group: Sequence[RunRecord], metric: str) -> np.ndarray:
    if metric == "recovery":
        return np.array([float(r.trajectory.final_recommendation == r.true_winner) for r in group])
    if metric == "cum_regret":
        return np.array([float(r.trajectory.cumulative_regret[-1]) for r in group])
    if metric == "true_rank":
        return np.array([float(r.trajectory.true_rank_of_reported[-1]) for r in group])
    raise ValueError(f"unknown metric {metric!r}")


def _summarize_group(group: Sequence[RunRecord]) -> SummaryRow:
    first = group[0]
    trajectories = [r.trajectory for r in group]
    hits = [r for r in group if r.trajectory.final_recommendation == r.true_winner]
    recovery = len(hits) / len(group)
    true_ranks = [float(r.trajectory.true_rank_of_reported[-1]) for r in group]
    reported = [
        float(r.trajectory.reported_rank_of_true[-1])
        for r in group
        if r.trajectory.reported_rank_of_true is not None
    ]
    failures = [r for r in group if r.trajectory.final_recommendation != r.true_winner]
    fail_ranks = [float(r.trajectory.true_rank_of_reported[-1]) for r in failures]
    deltas = np.array([r.delta12 for r in group])
    return SummaryRow(
        dataset=first.dataset,
        agent=first.agent,
        budget=first.budget,
        recovery_fraction=recovery,
        mean_true_rank=float(np.mean(true_ranks)),
        mean_reported_rank=float(np.mean(reported)) if reported else None,
        mean_cum_regret=float(np.mean([t.cumulative_regret[-1] for t in trajectories])),
        failure_rate=1.0 - recovery,
        avg_true_rank_on_failure=float(np.mean(fail_ranks)) if fail_ranks else None,
        delta12_mean=float(deltas.mean()),
        delta12_std=float(deltas.std(ddof=1)) if len(deltas) > 1 else 0.0,
    )


def make_agent(
    name: str,
    env: PreferenceEnvironment,
    budget: int,
    run_seed: int,
    smoothing: float = 1.0,
    qtable: QTable | None = None,
) -> Agent:
    rng = derive_rng("agent", run_seed)
    if name == "random":
        return RandomAgent(env.k, rng)
    if name == "dts":
        return DoubleThompsonSamplingAgent(env.k, rng)
    if name == "parwis":
        return ParwisAgent(env.k, rng, smoothing)
    if name == "contextual":
        return ContextualParwisAgent(env.k, rng, features=env.features, smoothing=smoothing)
    if name == "rl":
        if qtable is None:
            raise ValueError("rl agent needs a trained Q-table")
        return RlParwisAgent(env.k, budget, qtable, rng, smoothing)
    raise ValueError(f"unknown agent {name!r}; valid: {', '.join(AGENT_NAMES)}")


def run_single(
    env: PreferenceEnvironment, agent: Agent, budget: int, run_seed: int
) -> RunTrajectory:
    """Drive one agent for exactly ``budget`` duels, recording metrics at every step."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if budget < agent.init_duels:
        raise ValueError(
            f"budget {budget} is below the {agent.init_duels} initialization duels of {agent.name}"
        )
    rng = derive_rng("duel", run_seed)
    true_winner = env.true_winner
    has_ranking = agent.internal_ranking() is not None or agent.init_duels > 0
    cum_regret = np.zeros(budget, dtype=np.int64)
    recommended = np.zeros(budget, dtype=np.int64)
    true_ranks = np.zeros(budget, dtype=np.int64)
    reported = np.zeros(budget, dtype=np.int64) if has_ranking else None
    regret = 0
    for t in range(1, budget + 1):
        i, j = agent.select_pair(t)
        winner = duel(env, i, j, rng)
        obs = DuelObservation(i=i, j=j, winner=winner, t=t)
        agent.observe(obs)
        regret += regret_increment(obs, true_winner)
        cum_regret[t - 1] = regret
        rec = agent.recommend()
        recommended[t - 1] = rec
        true_ranks[t - 1] = true_rank_of(rec, env.true_order)
        if reported is not None:
            reported[t - 1] = reported_rank_of_true(true_winner, agent.internal_ranking())
    return RunTrajectory(
        agent=agent.name,
        budget=budget,
        seed=run_seed,
        cumulative_regret=cum_regret,
        recommended_item=recommended,
        true_rank_of_reported=true_ranks,
        reported_rank_of_true=reported,
    )


def _load_real_table(config: ExperimentConfig) -> RatingsTable:
    path = Path(config.dataset_path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    loader = load_jester if config.dataset == "jester" else load_movielens
    return select_items(loader(path), config.dataset, config.k, seed=config.seed)


def build_environment(config: ExperimentConfig, run: int) -> PreferenceEnvironment:
    """The preference environment used by run ``run``; fresh per run only for synthetic."""
    if config.dataset == "synthetic":
        return generate_synthetic(
            config.k, config.feature_dim, stable_seed(config.seed, config.dataset, "env", run)
        )
    table = _load_real_table(config)
    matrix = ratings_to_preferences(table, config.logistic_scale)
    return PreferenceEnvironment.from_matrix(matrix, label=config.dataset)


def _execute_cell(args: tuple) -> RunRecord:
    config, agent_name, budget, run, env, qtable = args
    run_seed = stable_seed(config.seed, config.dataset, agent_name, budget, run)
    agent = make_agent(agent_name, env, budget, run_seed, config.smoothing, qtable)
    trajectory = run_single(env, agent, budget, run_seed)
    return RunRecord(
        dataset=config.dataset,
        agent=agent_name,
        budget=budget,
        run=run,
        trajectory=trajectory,
        delta12=delta12(env),
        true_winner=env.true_winner,
    )


def _train_policies(
    config: ExperimentConfig, fixed_env: PreferenceEnvironment | None
) -> dict[int, QTable]:
    """One Q-table per budget, trained before any evaluation cell runs."""
    tables: dict[int, QTable] = {}
    for budget in config.budgets:
        if config.dataset == "synthetic":
            def sampler(episode: int, _budget=budget) -> PreferenceEnvironment:
                return generate_synthetic(
                    config.k,
                    config.feature_dim,
                    stable_seed(config.seed, config.dataset, "rl-train-env", _budget, episode),
                )
        else:
            def sampler(episode: int) -> PreferenceEnvironment:
                return fixed_env
        tables[budget] = train_rl(
            sampler,
            config.rl.episodes,
            budget,
            hyper=config.rl.hyperparams(),
            seed=stable_seed(config.seed, config.dataset, "rl-train", budget),
            smoothing=config.smoothing,
        )
    return tables


def run_experiment(config: ExperimentConfig) -> ResultsTable:
    config.validate()
    if config.dataset == "synthetic":
        envs = [build_environment(config, run) for run in range(config.runs)]
        ratings = None
    else:
        ratings = _load_real_table(config)
        matrix = ratings_to_preferences(ratings, config.logistic_scale)
        fixed = PreferenceEnvironment.from_matrix(matrix, label=config.dataset)
        envs = [fixed] * config.runs

    qtables: dict[int, QTable] = {}
    if "rl" in config.agents:
        qtables = _train_policies(config, envs[0] if config.dataset != "synthetic" else None)

    cells = [
        (config, agent, budget, run, envs[run], qtables.get(budget))
        for agent in config.ordered_agents()
        for budget in sorted(config.budgets)
        for run in range(config.runs)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_execute_cell, cells, chunksize=1))
    else:
        records = [_execute_cell(cell) for cell in cells]
    return ResultsTable(records=records, environment=envs[0], ratings=ratings)


# --- CSV emission -------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


def _write_csv(path: Path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) if not isinstance(cell, str) else cell for cell in row])


def emit_results(results: ResultsTable, output_dir: str | Path) -> list[Path]:
    """Write trajectories.csv, summary.csv, and ttests.csv; returns the paths."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    def trajectory_rows():
        for r in results.records:
            t = r.trajectory
            for d in range(t.budget):
                yield (
                    r.dataset, r.agent, r.budget, r.run, d + 1,
                    int(t.cumulative_regret[d]),
                    int(t.recommended_item[d] == r.true_winner),
                    int(t.true_rank_of_reported[d]),
                    None if t.reported_rank_of_true is None else int(t.reported_rank_of_true[d]),
                )

    trajectories = out / "trajectories.csv"
    _write_csv(trajectories, TRAJECTORIES_HEADER, trajectory_rows())

    summary = out / "summary.csv"
    _write_csv(
        summary,
        SUMMARY_HEADER,
        (
            (
                s.dataset, s.agent, s.budget, s.recovery_fraction, s.mean_true_rank,
                s.mean_reported_rank, s.mean_cum_regret, s.failure_rate,
                s.avg_true_rank_on_failure, s.delta12_mean, s.delta12_std,
            )
            for s in results.aggregates()
        ),
    )

    ttests = out / "ttests.csv"
    _write_csv(
        ttests,
        TTESTS_HEADER,
        (
            (t.dataset, t.budget, t.agent_a, t.agent_b, t.metric, t.t_stat, t.p_value, t.df)
            for t in results.ttests()
        ),
    )
    return [trajectories, summary, ttests]


def emit_dataset_artifacts(results: ResultsTable, output_dir: str | Path) -> list[Path]:
    """Dataset-view inputs for the plotting component: matrix, item values, per-run deltas."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    env = results.environment
    if env is not None:
        matrix_path = out / "preference_matrix.csv"
        with open(matrix_path, "w", newline="\n") as fh:
            for row in env.matrix.p:
                fh.write(",".join(format(v, ".12g") for v in row) + "\n")
        paths.append(matrix_path)

    values_path = out / "ratings.csv"
    if results.ratings is not None and results.ratings.values is not None:
        rows = (
            (item, float(v))
            for item, vals in zip(results.ratings.items, results.ratings.values)
            for v in vals
        )
        _write_csv(values_path, ("item", "value"), rows)
        paths.append(values_path)
    elif env is not None and env.scores is not None:
        _write_csv(
            values_path,
            ("item", "value"),
            ((i, float(s)) for i, s in enumerate(env.scores)),
        )
        paths.append(values_path)

    seen: set[tuple[str, int]] = set()
    delta_rows = []
    for r in results.records:
        if (r.dataset, r.run) not in seen:
            seen.add((r.dataset, r.run))
            delta_rows.append((r.dataset, r.run, r.delta12))
    delta_path = out / "delta12.csv"
    _write_csv(delta_path, ("dataset", "run", "delta12"), sorted(delta_rows))
    paths.append(delta_path)
    return paths
