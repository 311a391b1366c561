from __future__ import annotations

import numpy as np
import pytest

from duelkit.env import generate_synthetic
from duelkit.runner import (
    ExperimentConfig,
    ResultsTable,
    RlTrainConfig,
    emit_dataset_artifacts,
    emit_results,
    make_agent,
    run_experiment,
    run_single,
)


def small_config(**overrides) -> ExperimentConfig:
    defaults = dict(
        dataset="synthetic",
        k=6,
        budgets=(10,),
        runs=3,
        seed=5,
        agents=("random", "parwis"),
        rl=RlTrainConfig(episodes=8),
        feature_dim=2,
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


class TestRunSingle:
    def test_budget_equal_init_is_pure_initialization(self):
        env = generate_synthetic(6, 0, seed=1)
        agent = make_agent("parwis", env, 5, run_seed=9)
        trajectory = run_single(env, agent, budget=5, run_seed=9)
        assert trajectory.budget == 5
        assert agent.in_initialization is False
        assert 0 <= trajectory.final_recommendation < 6

    @pytest.mark.parametrize("name", ["random", "dts", "parwis", "contextual"])
    def test_arrays_have_length_budget(self, name):
        env = generate_synthetic(6, 2, seed=2)
        agent = make_agent(name, env, 12, run_seed=3)
        trajectory = run_single(env, agent, budget=12, run_seed=3)
        assert len(trajectory.cumulative_regret) == 12
        assert len(trajectory.recommended_item) == 12
        assert len(trajectory.true_rank_of_reported) == 12
        if name in ("random", "dts"):
            assert trajectory.reported_rank_of_true is None
        else:
            assert len(trajectory.reported_rank_of_true) == 12

    @pytest.mark.parametrize("name", ["random", "dts", "parwis", "contextual"])
    def test_deterministic_replay(self, name):
        env = generate_synthetic(6, 2, seed=4)

        def execute():
            agent = make_agent(name, env, 14, run_seed=77)
            return run_single(env, agent, budget=14, run_seed=77)

        a, b = execute(), execute()
        assert np.array_equal(a.cumulative_regret, b.cumulative_regret)
        assert np.array_equal(a.recommended_item, b.recommended_item)
        assert np.array_equal(a.true_rank_of_reported, b.true_rank_of_reported)

    def test_budget_below_init_rejected(self):
        env = generate_synthetic(6, 0, seed=1)
        agent = make_agent("parwis", env, 4, run_seed=0)
        with pytest.raises(ValueError):
            run_single(env, agent, budget=4, run_seed=0)


class TestConfigValidation:
    def test_unknown_agent_lists_valid_names(self):
        config = small_config(agents=("parwis", "ucb"))
        with pytest.raises(ValueError, match="random, dts, parwis, contextual, rl"):
            config.validate()

    def test_unknown_dataset(self):
        with pytest.raises(ValueError, match="synthetic"):
            small_config(dataset="sushi").validate()

    def test_real_dataset_needs_path(self):
        with pytest.raises(ValueError, match="data-path"):
            small_config(dataset="jester", dataset_path=None).validate()

    def test_budget_below_init_for_family(self):
        with pytest.raises(ValueError, match="initialization"):
            small_config(budgets=(4,), agents=("parwis",)).validate()

    def test_budget_below_init_fine_for_baselines(self):
        small_config(budgets=(4,), agents=("random", "dts")).validate()

    def test_missing_file_error_names_path(self, tmp_path):
        config = small_config(dataset="movielens", dataset_path=str(tmp_path / "nope.csv"))
        with pytest.raises(FileNotFoundError, match="nope.csv"):
            run_experiment(config)


class TestRunExperiment:
    def test_row_counting(self):
        config = small_config(agents=("random",), budgets=(10,), runs=1)
        results = run_experiment(config)
        assert len(results.records) == 1
        rows = sum(r.trajectory.budget for r in results.records)
        assert rows == 10

    def test_synthetic_delta_varies_and_envs_are_shared_across_agents(self):
        config = small_config(runs=4, k=8)
        results = run_experiment(config)
        deltas = {}
        for record in results.records:
            deltas.setdefault(record.run, set()).add(record.delta12)
        # same run -> same environment for every agent; across runs it varies
        assert all(len(values) == 1 for values in deltas.values())
        per_run = [values.pop() for values in deltas.values()]
        assert np.std(per_run) > 0

    def test_real_dataset_delta_constant(self, movielens_file):
        config = small_config(
            dataset="movielens",
            dataset_path=str(movielens_file),
            agents=("random",),
            runs=3,
            budgets=(6,),
        )
        results = run_experiment(config)
        assert len({r.delta12 for r in results.records}) == 1

    def test_aggregate_shape(self):
        config = small_config(agents=("random", "dts", "parwis"), budgets=(8, 10), runs=2)
        results = run_experiment(config)
        rows = results.aggregates()
        assert len(rows) == 3 * 2
        assert {row.agent for row in rows} == {"random", "dts", "parwis"}

    def test_rl_policy_trained_per_budget(self):
        config = small_config(agents=("rl",), budgets=(8, 10), runs=2)
        results = run_experiment(config)
        assert len(results.records) == 4
        for record in results.records:
            assert record.trajectory.reported_rank_of_true is not None

    def test_workers_do_not_change_results(self):
        config = small_config(agents=("random", "parwis"), budgets=(8,), runs=3)
        serial = run_experiment(config)
        parallel = run_experiment(small_config(
            agents=("random", "parwis"), budgets=(8,), runs=3, workers=3
        ))
        for a, b in zip(serial.records, parallel.records):
            assert a.dataset == b.dataset and a.agent == b.agent and a.run == b.run
            assert np.array_equal(a.trajectory.cumulative_regret, b.trajectory.cumulative_regret)
            assert np.array_equal(a.trajectory.recommended_item, b.trajectory.recommended_item)

    def test_failure_columns_agree_with_error_analysis(self, movielens_file):
        # fixed-environment dataset: group-level aggregates must equal the
        # stats-module computation run on the same trajectories
        from duelkit.runner import build_environment
        from duelkit.stats import error_analysis

        config = small_config(
            dataset="movielens",
            dataset_path=str(movielens_file),
            agents=("random", "dts"),
            budgets=(8,),
            runs=6,
        )
        results = run_experiment(config)
        env = build_environment(config, 0)
        for row in results.aggregates():
            group = results.group(row.agent, row.budget)
            analysis = error_analysis(
                [r.trajectory for r in group], env.true_winner, env.true_order
            )
            assert row.failure_rate == analysis.failure_rate
            assert row.failure_rate + row.recovery_fraction == 1.0
            if analysis.avg_true_rank_on_failure is None:
                assert row.avg_true_rank_on_failure is None
            else:
                assert row.avg_true_rank_on_failure == analysis.avg_true_rank_on_failure

    def test_agent_order_does_not_change_seeds(self):
        first = run_experiment(small_config(agents=("random", "parwis")))
        second = run_experiment(small_config(agents=("parwis", "random")))
        a = [r for r in first.records if r.agent == "parwis"]
        b = [r for r in second.records if r.agent == "parwis"]
        for x, y in zip(a, b):
            assert np.array_equal(x.trajectory.recommended_item, y.trajectory.recommended_item)


class TestEmission:
    def test_empty_table_writes_headers_only(self, tmp_path):
        paths = emit_results(ResultsTable(records=[]), tmp_path)
        for path in paths:
            lines = path.read_text().splitlines()
            assert len(lines) == 1
            assert "," in lines[0]

    def test_single_run_row_count(self, tmp_path):
        config = small_config(agents=("random",), budgets=(10,), runs=1)
        results = run_experiment(config)
        paths = emit_results(results, tmp_path)
        trajectories = paths[0].read_text().splitlines()
        assert len(trajectories) == 10 + 1
        assert trajectories[0] == (
            "dataset,agent,budget,run,duel,cum_regret,recovered,true_rank,reported_rank"
        )

    def test_reemission_is_byte_identical(self, tmp_path):
        config = small_config(agents=("random", "parwis"), runs=2)
        results = run_experiment(config)
        first = {p.name: p.read_bytes() for p in emit_results(results, tmp_path / "a")}
        second = {p.name: p.read_bytes() for p in emit_results(results, tmp_path / "b")}
        assert first == second

    def test_summary_headers(self, tmp_path):
        results = run_experiment(small_config())
        paths = emit_results(results, tmp_path)
        assert paths[1].read_text().splitlines()[0] == (
            "dataset,agent,budget,recovery_fraction,mean_true_rank,mean_reported_rank,"
            "mean_cum_regret,failure_rate,avg_true_rank_on_failure,delta12_mean,delta12_std"
        )
        assert paths[2].read_text().splitlines()[0] == (
            "dataset,budget,agent_a,agent_b,metric,t_stat,p_value,df"
        )

    def test_summary_round_trips_from_trajectories(self, tmp_path):
        import csv as csvmod

        config = small_config(agents=("random", "dts", "parwis"), budgets=(8,), runs=4)
        results = run_experiment(config)
        paths = emit_results(results, tmp_path)
        with open(paths[0]) as fh:
            rows = list(csvmod.DictReader(fh))
        finals = {}
        for row in rows:
            key = (row["agent"], int(row["budget"]), int(row["run"]))
            if int(row["duel"]) == int(row["budget"]):
                finals[key] = row
        with open(paths[1]) as fh:
            for summary in csvmod.DictReader(fh):
                agent, budget = summary["agent"], int(summary["budget"])
                group = [v for (a, b, _), v in finals.items() if a == agent and b == budget]
                recomputed_recovery = np.mean([float(r["recovered"]) for r in group])
                recomputed_regret = np.mean([float(r["cum_regret"]) for r in group])
                recomputed_rank = np.mean([float(r["true_rank"]) for r in group])
                assert abs(float(summary["recovery_fraction"]) - recomputed_recovery) < 1e-9
                assert abs(float(summary["mean_cum_regret"]) - recomputed_regret) < 1e-9
                assert abs(float(summary["mean_true_rank"]) - recomputed_rank) < 1e-9

    def test_reported_rank_field_empty_for_baselines(self, tmp_path):
        import csv as csvmod

        results = run_experiment(small_config(agents=("random", "parwis")))
        paths = emit_results(results, tmp_path)
        with open(paths[0]) as fh:
            for row in csvmod.DictReader(fh):
                if row["agent"] == "random":
                    assert row["reported_rank"] == ""
                else:
                    assert row["reported_rank"] != ""

    def test_dataset_artifacts_for_synthetic(self, tmp_path):
        results = run_experiment(small_config())
        paths = emit_dataset_artifacts(results, tmp_path)
        names = {p.name for p in paths}
        assert names == {"preference_matrix.csv", "ratings.csv", "delta12.csv"}
        matrix = np.loadtxt(tmp_path / "preference_matrix.csv", delimiter=",")
        assert matrix.shape == (6, 6)
        deltas = (tmp_path / "delta12.csv").read_text().splitlines()
        assert deltas[0] == "dataset,run,delta12"
        assert len(deltas) == 1 + 3

    def test_dataset_artifacts_for_movielens(self, tmp_path, movielens_file):
        config = small_config(
            dataset="movielens",
            dataset_path=str(movielens_file),
            agents=("random",),
            budgets=(6,),
            runs=2,
        )
        results = run_experiment(config)
        paths = emit_dataset_artifacts(results, tmp_path)
        ratings_lines = (tmp_path / "ratings.csv").read_text().splitlines()
        assert ratings_lines[0] == "item,value"
        assert len(ratings_lines) > 6  # raw ratings of the selected movies
