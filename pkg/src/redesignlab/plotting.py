"""Figure rendering for the CLI report paths. Uses the Agg backend so the
commands work headless; every function writes a file and returns its path."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulator import ReplicationSummary, SweepRow


def render_sweep_figure(rows: Sequence[SweepRow], path: str | Path,
                        title: str | None = None) -> Path:
    """Mean throughput time against mean interarrival time for both variants,
    with 95% confidence bars. Unstable settings are shaded."""
    path = Path(path)
    gaps = [row.interarrival for row in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.errorbar(gaps, [r.mean_original for r in rows],
                yerr=[r.ci_original for r in rows],
                color="tab:red", marker="o", markersize=3.5, capsize=2.5,
                linewidth=1.2, label="original")
    ax.errorbar(gaps, [r.mean_eliminated for r in rows],
                yerr=[r.ci_eliminated for r in rows],
                color="tab:blue", marker="s", markersize=3.5, capsize=2.5,
                linewidth=1.2, label="after elimination")
    unstable = [r.interarrival for r in rows if "unstable" in r.flags]
    if unstable:
        ax.axvspan(min(gaps), max(unstable), color="0.85", zorder=0,
                   label="saturated")
    ax.set_xlabel("mean interarrival time (minutes)")
    ax.set_ylabel("mean throughput time (minutes)")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_replication_figure(summary: ReplicationSummary, path: str | Path,
                              title: str | None = None) -> Path:
    """Histogram of per-replication mean throughput times with the pooled
    mean and its 95% interval overlaid."""
    path = Path(path)
    means = [m for m in summary.rep_means if m == m]  # drop NaN reps
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    bins = min(30, max(5, len(means) // 3)) if means else 5
    ax.hist(means, bins=bins, color="tab:blue", alpha=0.7, edgecolor="white")
    ax.axvline(summary.mean, color="tab:red", linewidth=1.5, label="mean")
    if summary.ci_half_width > 0:
        ax.axvspan(summary.mean - summary.ci_half_width,
                   summary.mean + summary.ci_half_width,
                   color="tab:red", alpha=0.15, label="95% interval")
    ax.set_xlabel("mean throughput time per replication (minutes)")
    ax.set_ylabel("replications")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
