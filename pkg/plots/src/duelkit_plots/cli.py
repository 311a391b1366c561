"""duelkit-plot: render figures from a duelkit output directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import render_boxplots, render_dataset_views, render_performance


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="duelkit-plot")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_budget in (("perf", True), ("box", False), ("data", False)):
        command = sub.add_parser(name)
        command.add_argument("--in", dest="in_dir", required=True)
        command.add_argument("--dataset", required=True)
        command.add_argument("--out", dest="out_dir", required=True)
        command.add_argument("--format", dest="image_format", choices=("pdf", "png"), default="pdf")
        if needs_budget:
            command.add_argument("--budget", type=int, required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    in_dir = Path(args.in_dir)
    try:
        if args.command == "perf":
            manifest = render_performance(
                in_dir / "trajectories.csv", args.dataset, args.budget,
                args.out_dir, args.image_format,
            )
        elif args.command == "box":
            manifest = render_boxplots(
                in_dir / "trajectories.csv", args.dataset, args.out_dir, args.image_format
            )
        else:
            manifest = render_dataset_views(
                in_dir, args.dataset, args.out_dir, args.image_format
            )
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in manifest.paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
