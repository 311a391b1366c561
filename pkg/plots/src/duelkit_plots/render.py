"""Paper-style figures from experiment CSVs: per-duel curves, final boxplots, dataset views.

This layer computes display statistics only (means over runs, box quartiles);
every science-bearing number comes straight out of the CSVs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from matplotlib.cbook import boxplot_stats

from .io import (
    load_deltas,
    load_item_values,
    load_preference_matrix,
    load_trajectories,
)

PERFORMANCE_METRICS = (
    ("cum_regret", "regret", "Cumulative regret"),
    ("recovered", "recovery", "Recovery fraction"),
    ("true_rank", "true_rank", "True rank of reported winner"),
    ("reported_rank", "reported_rank", "Reported rank of true winner"),
)

HISTOGRAM_BINS = {
    "jester": np.linspace(-10.0, 10.0, 41),
    "movielens": np.arange(0.25, 5.26, 0.5),
}


@dataclass
class PlotManifest:
    """Paths written plus enough metadata to audit what each panel showed."""

    paths: list[Path] = field(default_factory=list)
    panel_agents: dict[str, list[str]] = field(default_factory=dict)
    box_medians: dict[tuple[int, str, str], float] = field(default_factory=dict)
    histogram_bins: np.ndarray | None = None


def _filtered(frame: pd.DataFrame, dataset: str, budget: int | None = None) -> pd.DataFrame:
    selected = frame[frame["dataset"] == dataset]
    if budget is not None:
        selected = selected[selected["budget"] == budget]
    if selected.empty:
        scope = f"dataset={dataset!r}" + ("" if budget is None else f", budget={budget}")
        raise ValueError(f"no trajectory rows match {scope}")
    return selected


def _agent_order(frame: pd.DataFrame) -> list[str]:
    return list(dict.fromkeys(frame["agent"]))


def render_performance(
    trajectories_csv: str | Path,
    dataset: str,
    budget: int,
    out_dir: str | Path,
    image_format: str = "pdf",
) -> PlotManifest:
    """Four per-duel mean curves (one file each); reported-rank panel only covers
    agents that actually report an internal ranking."""
    frame = _filtered(load_trajectories(trajectories_csv), dataset, budget)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = PlotManifest()
    agents = _agent_order(frame)
    for column, stem, label in PERFORMANCE_METRICS:
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        drawn = []
        for agent in agents:
            rows = frame[frame["agent"] == agent]
            series = rows.dropna(subset=[column]).groupby("duel")[column].mean()
            if series.empty:
                continue
            ax.plot(series.index, series.values, label=agent)
            drawn.append(agent)
        ax.set_xlabel("duel")
        ax.set_ylabel(label)
        ax.set_title(f"{dataset}, B={budget}")
        ax.legend(fontsize=7)
        path = out / f"{dataset}_mean_{stem}_budget_{budget}.{image_format}"
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
        manifest.paths.append(path)
        manifest.panel_agents[stem] = drawn
    return manifest


def render_boxplots(
    trajectories_csv: str | Path,
    dataset: str,
    out_dir: str | Path,
    image_format: str = "pdf",
) -> PlotManifest:
    """One figure per budget: final-duel metric distributions, one box per agent."""
    frame = _filtered(load_trajectories(trajectories_csv), dataset)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = PlotManifest()
    for budget in sorted(frame["budget"].unique()):
        rows = frame[(frame["budget"] == budget) & (frame["duel"] == frame["budget"])]
        agents = _agent_order(rows)
        fig, axes = plt.subplots(1, 4, figsize=(13, 3.2))
        for ax, (column, stem, label) in zip(axes, PERFORMANCE_METRICS):
            stats, labels = [], []
            for agent in agents:
                values = rows[rows["agent"] == agent][column].dropna().to_numpy()
                if values.size == 0:
                    continue
                stat = boxplot_stats(values, whis=1.5, labels=[agent])[0]
                stats.append(stat)
                labels.append(agent)
                manifest.box_medians[(int(budget), stem, agent)] = float(stat["med"])
            if stats:
                ax.bxp(stats, showfliers=True)
                ax.tick_params(axis="x", rotation=45, labelsize=7)
            ax.set_title(label, fontsize=8)
        fig.suptitle(f"{dataset}, B={budget}, final-duel distributions")
        path = out / f"{dataset}_boxplot_budget_{budget}.{image_format}"
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
        manifest.paths.append(path)
    return manifest


def render_dataset_views(
    in_dir: str | Path,
    dataset: str,
    out_dir: str | Path,
    image_format: str = "pdf",
) -> PlotManifest:
    """Preference-matrix heatmap, item-value histogram, and per-run delta12 boxplot."""
    in_dir = Path(in_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = PlotManifest()

    matrix = load_preference_matrix(in_dir / "preference_matrix.csv")
    fig, ax = plt.subplots(figsize=(4.0, 3.4))
    image = ax.imshow(matrix, cmap="viridis", vmin=0.0, vmax=1.0)
    fig.colorbar(image, ax=ax, label="P(row beats column)")
    ax.set_title(f"{dataset} preference matrix")
    path = out / f"{dataset}_preference_matrix.{image_format}"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    manifest.paths.append(path)

    values = load_item_values(in_dir / "ratings.csv")
    bins = HISTOGRAM_BINS.get(dataset, 20)
    fig, ax = plt.subplots(figsize=(4.0, 3.2))
    _counts, edges, _patches = ax.hist(values["value"], bins=bins, edgecolor="black")
    ax.set_xlabel("rating" if dataset in HISTOGRAM_BINS else "item score")
    ax.set_ylabel("count")
    ax.set_title(f"{dataset} item values")
    path = out / f"{dataset}_ratings_histogram.{image_format}"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    manifest.paths.append(path)
    manifest.histogram_bins = np.asarray(edges)

    deltas = load_deltas(in_dir / "delta12.csv")
    deltas = deltas[deltas["dataset"] == dataset]
    if deltas.empty:
        raise ValueError(f"no delta12 rows match dataset={dataset!r}")
    fig, ax = plt.subplots(figsize=(3.2, 3.2))
    ax.boxplot(deltas["delta12"].to_numpy(), tick_labels=[dataset])
    ax.set_ylabel("delta12")
    ax.set_title("top-2 separation across runs")
    path = out / f"{dataset}_delta12_boxplot.{image_format}"
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    manifest.paths.append(path)
    return manifest
