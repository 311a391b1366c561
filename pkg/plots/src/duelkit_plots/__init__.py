"""Figure rendering for duelkit experiment CSVs."""

from .render import PlotManifest, render_boxplots, render_dataset_views, render_performance

__version__ = "0.1.0"
