#!/usr/bin/env python3
"""Print the top-2 separation (problem difficulty) of each configured dataset.

    python scripts/compare_difficulty.py [--jester J.csv] [--movielens M.csv]
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from duelkit.env import delta12
from duelkit.runner import ExperimentConfig, build_environment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--runs", type=int, default=30)
    parser.add_argument("--jester")
    parser.add_argument("--movielens")
    args = parser.parse_args()

    jobs = [("synthetic", None)]
    if args.jester:
        jobs.append(("jester", args.jester))
    if args.movielens:
        jobs.append(("movielens", args.movielens))
    for dataset, path in jobs:
        config = ExperimentConfig(dataset=dataset, dataset_path=path, seed=args.seed)
        runs = args.runs if dataset == "synthetic" else 1
        deltas = np.array([delta12(build_environment(config, run)) for run in range(runs)])
        std = deltas.std(ddof=1) if len(deltas) > 1 else 0.0
        print(f"{dataset:10s} delta12 = {deltas.mean():.4f} +/- {std:.4f} (n={len(deltas)})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
