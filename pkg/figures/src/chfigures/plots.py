"""Figure builders: norm-evolution panels and snapshot grids."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .io import SnapshotManifest, read_checkpoint, read_diagnostics_csv

__all__ = ["NORM_PANELS", "build_norm_figure", "plot_norm_evolution",
           "build_snapshot_figure", "plot_snapshots"]

NORM_PANELS = (
    ("h1", r"$\|\nabla u\|_h$"),
    ("h2", r"$\|\Delta u\|_h$"),
    ("h3", r"$\|\nabla\Delta u\|_h$"),
    ("omega_h1", r"$\|\nabla \omega\|_h$"),
)


def build_norm_figure(csv_paths, labels=None, logy=False):
    """Four panels (first to third order norms of u, first of omega), one
    curve per diagnostics file.  Returns the matplotlib figure."""
    import matplotlib.pyplot as plt

    paths = [Path(p) for p in csv_paths]
    if labels is None:
        labels = [p.stem for p in paths]
    if len(labels) != len(paths):
        raise ValueError("need one label per csv path")
    runs = [read_diagnostics_csv(p) for p in paths]

    fig, axes = plt.subplots(2, 2, figsize=(11, 8), sharex=True)
    for ax, (column, title) in zip(axes.ravel(), NORM_PANELS):
        for label, cols in zip(labels, runs):
            ax.plot(cols["t"], cols[column], label=label, linewidth=1.2)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        if logy:
            ax.set_yscale("log")
    for ax in axes[-1]:
        ax.set_xlabel("t")
    axes[0][0].legend(loc="best")
    fig.suptitle("Time evolution of the discrete norms")
    fig.tight_layout()
    return fig


def plot_norm_evolution(csv_paths, out_dir, labels=None, fmt="png", logy=False):
    """Write the norm-evolution figure; returns the output path."""
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig = build_norm_figure(csv_paths, labels=labels, logy=logy)
    target = out / f"norms.{fmt}"
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def build_snapshot_figure(manifest: SnapshotManifest, vmin=-1.2, vmax=1.2,
                          cmap="RdBu_r"):
    """Heatmap grid: one row per snapshot time, one column per run, with a
    shared color scale.  Returns the matplotlib figure."""
    import matplotlib.pyplot as plt

    times = manifest.times
    ncol = len(manifest.columns)
    nrow = len(times)
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.2 * ncol, 3.0 * nrow),
                             squeeze=False)
    mappable = None
    for j, col in enumerate(manifest.columns):
        by_time = {s.time: s.path for s in col.snapshots}
        for i, t in enumerate(times):
            ax = axes[i][j]
            if t not in by_time:
                ax.set_axis_off()
                continue
            values, t_file = read_checkpoint(by_time[t])
            mappable = ax.imshow(values.T, origin="lower", vmin=vmin, vmax=vmax,
                                 cmap=cmap, interpolation="nearest")
            ax.set_xticks([])
            ax.set_yticks([])
            if i == 0:
                ax.set_title(col.label)
            if j == 0:
                ax.set_ylabel(f"t = {t:g}")
    if mappable is not None:
        fig.colorbar(mappable, ax=axes, shrink=0.8, label="u")
    return fig


def plot_snapshots(manifest: SnapshotManifest, out_dir, fmt="png", vmin=-1.2,
                   vmax=1.2, cmap="RdBu_r"):
    """Write the snapshot grid; returns the output path."""
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig = build_snapshot_figure(manifest, vmin=vmin, vmax=vmax, cmap=cmap)
    target = out / f"snapshots.{fmt}"
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target
