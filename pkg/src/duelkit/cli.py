"""Command-line entry point: run sweeps, inspect problem difficulty, train RL policies."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

import numpy as np

from .env import delta12
from .rl import train_rl
from .rng import stable_seed
from .runner import (
    DATASETS,
    ExperimentConfig,
    RlTrainConfig,
    build_environment,
    emit_dataset_artifacts,
    emit_results,
    run_experiment,
)


def _csv_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _csv_strs(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", choices=DATASETS, default=None)
    parser.add_argument("--data-path", dest="dataset_path", default=None)
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--logistic-scale", dest="logistic_scale", type=float, default=None)
    parser.add_argument("--smoothing", type=float, default=None)
    parser.add_argument("--config", default=None, help="JSON config file; flags win over it")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="duelkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a full experiment sweep")
    _add_common(run)
    run.add_argument("--budgets", type=_csv_ints, default=None)
    run.add_argument("--runs", type=int, default=None)
    run.add_argument("--agents", type=_csv_strs, default=None)
    run.add_argument("--out", dest="output_dir", default=None)
    run.add_argument("--rl-episodes", dest="rl_episodes", type=int, default=None)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--feature-dim", dest="feature_dim", type=int, default=None)

    delta = sub.add_parser("delta", help="print the top-2 separation of a dataset")
    _add_common(delta)
    delta.add_argument("--runs", type=int, default=None)

    train = sub.add_parser("train-rl", help="train a Q-table and save it as CSV")
    _add_common(train)
    train.add_argument("--budget", type=int, default=40)
    train.add_argument("--rl-episodes", dest="rl_episodes", type=int, default=None)
    train.add_argument("--out", dest="output_path", default="policy.csv")
    return parser


def _config_from(args: argparse.Namespace) -> ExperimentConfig:
    file_values: dict = {}
    if args.config:
        with open(args.config) as fh:
            file_values = json.load(fh)
    values: dict = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for key, value in file_values.items():
        if key == "rl":
            values["rl"] = RlTrainConfig(**value)
        elif key in known:
            values[key] = tuple(value) if isinstance(value, list) else value
        else:
            raise ValueError(f"unknown config key {key!r}")
    for key in known:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    episodes = getattr(args, "rl_episodes", None)
    if episodes is not None:
        base = values.get("rl", RlTrainConfig())
        values["rl"] = RlTrainConfig(
            episodes=episodes, alpha=base.alpha, gamma=base.gamma,
            epsilon_start=base.epsilon_start, epsilon_end=base.epsilon_end,
        )
    return ExperimentConfig(**values)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from(args)
    results = run_experiment(config)
    paths = emit_results(results, config.output_dir)
    paths += emit_dataset_artifacts(results, config.output_dir)
    for path in paths:
        print(path)
    return 0


def _cmd_delta(args: argparse.Namespace) -> int:
    config = _config_from(args)
    config.validate()
    runs = config.runs if config.dataset == "synthetic" else 1
    deltas = np.array([delta12(build_environment(config, run)) for run in range(runs)])
    std = float(deltas.std(ddof=1)) if len(deltas) > 1 else 0.0
    print(f"delta12 mean={deltas.mean():.6g} std={std:.6g} runs={len(deltas)}")
    return 0


def _cmd_train_rl(args: argparse.Namespace) -> int:
    config = _config_from(args)
    config.validate()
    budget = args.budget
    if config.dataset == "synthetic":
        def sampler(episode: int):
            return build_environment_for_training(config, budget, episode)
    else:
        env = build_environment(config, 0)

        def sampler(episode: int):
            return env

    table = train_rl(
        sampler,
        config.rl.episodes,
        budget,
        hyper=config.rl.hyperparams(),
        seed=stable_seed(config.seed, config.dataset, "rl-train", budget),
        smoothing=config.smoothing,
    )
    table.save_csv(args.output_path)
    print(args.output_path)
    return 0


def build_environment_for_training(config: ExperimentConfig, budget: int, episode: int):
    from .env import generate_synthetic

    return generate_synthetic(
        config.k,
        config.feature_dim,
        stable_seed(config.seed, config.dataset, "rl-train-env", budget, episode),
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "delta": _cmd_delta, "train-rl": _cmd_train_rl}
    try:
        return handlers[args.command](args)
    except Exception as exc:  # single-line failure contract
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
