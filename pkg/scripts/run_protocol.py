#!/usr/bin/env python3
"""Run the full evaluation protocol: k=20, budgets 40/60/80, 30 runs per cell.

Synthetic runs out of the box; pass --jester / --movielens rating files to add
the real datasets.  ``--quick`` trims runs and RL episodes for a desk check.
Figures are rendered afterwards when duelkit-plots is installed.

    python scripts/run_protocol.py --out results/ [--quick]
    python scripts/run_protocol.py --out results/ --movielens ml-20m/ratings.csv
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path


def run_dataset(dataset: str, out_root: Path, args, data_path: str | None = None) -> Path:
    out = out_root / dataset
    command = [
        sys.executable, "-m", "duelkit.cli", "run",
        "--dataset", dataset,
        "--budgets", "40,60,80",
        "--runs", str(args.runs),
        "--seed", str(args.seed),
        "--agents", "random,dts,parwis,contextual,rl",
        "--rl-episodes", str(args.rl_episodes),
        "--workers", str(args.workers),
        "--out", str(out),
    ]
    if data_path:
        command += ["--data-path", data_path]
    print(f"== {dataset}: {' '.join(command)}")
    subprocess.run(command, check=True)
    return out


def render_figures(dataset: str, out: Path) -> None:
    try:
        import duelkit_plots  # noqa: F401
    except ImportError:
        print("duelkit-plots not installed; skipping figures")
        return
    figures = out / "figures"
    for budget in (40, 60, 80):
        subprocess.run(
            [sys.executable, "-m", "duelkit_plots.cli", "perf", "--in", str(out),
             "--dataset", dataset, "--budget", str(budget), "--out", str(figures)],
            check=True,
        )
    subprocess.run(
        [sys.executable, "-m", "duelkit_plots.cli", "box", "--in", str(out),
         "--dataset", dataset, "--out", str(figures)],
        check=True,
    )
    subprocess.run(
        [sys.executable, "-m", "duelkit_plots.cli", "data", "--in", str(out),
         "--dataset", dataset, "--out", str(figures)],
        check=True,
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output root directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--runs", type=int, default=30)
    parser.add_argument("--rl-episodes", type=int, default=5000)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--jester", help="path to the Jester ratings CSV")
    parser.add_argument("--movielens", help="path to the MovieLens ratings CSV")
    parser.add_argument("--quick", action="store_true", help="5 runs, 100 RL episodes")
    args = parser.parse_args()
    if args.quick:
        args.runs, args.rl_episodes = 5, 100

    out_root = Path(args.out)
    jobs: list[tuple[str, str | None]] = [("synthetic", None)]
    if args.jester:
        jobs.append(("jester", args.jester))
    if args.movielens:
        jobs.append(("movielens", args.movielens))
    for dataset, path in jobs:
        out = run_dataset(dataset, out_root, args, path)
        render_figures(dataset, out)
    print(f"done; results under {out_root}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
