"""duelkit: active winner determination from noisy pairwise comparisons under small budgets."""

from .agents import (
    Agent,
    BetaPosteriorGrid,
    ContextualParwisAgent,
    DoubleThompsonSamplingAgent,
    DuelObservation,
    ParwisAgent,
    RandomAgent,
)
from .env import (
    BtlScores,
    PreferenceEnvironment,
    PreferenceMatrix,
    btl_probability,
    delta12,
    duel,
    generate_synthetic,
)
from .metrics import RunTrajectory, recovery_fraction, regret_increment
from .rl import QTable, RlHyperparams, RlParwisAgent, train_rl
from .runner import ExperimentConfig, ResultsTable, emit_results, run_experiment, run_single
from .spectral import ComparisonCounts, SpectralScores, rank_centrality, ranking_from_scores
from .stats import ErrorAnalysis, TTestResult, error_analysis, welch_t_test

__version__ = "0.1.0"
