"""Matplotlib figure output for the CLI report paths.

Figures are rendered headless (Agg) straight to files next to the CSV
output. Row dictionaries use the same keys as the CSV columns, so callers
build one structure and feed both writers.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_KIND_COLUMNS = ("cost_gamut", "cost_min_distance", "cost_max_distance", "cost_anchor")
_METRIC_COLUMNS = ("visibility", "alignment_error", "grouping_violation", "displacement")


def plot_play_report(rows: Sequence[Mapping[str, object]], path: str) -> None:
    """Cost breakdown and layout metrics across replay frames, one PNG."""
    frames = list(range(len(rows)))
    fig, (ax_cost, ax_metric) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)

    ax_cost.plot(frames, [r["total_cost"] for r in rows], "k-o", label="total", linewidth=2)
    for column in _KIND_COLUMNS:
        ax_cost.plot(frames, [r[column] for r in rows], "--", label=column.removeprefix("cost_"))
    ax_cost.set_ylabel("cost")
    ax_cost.set_yscale("symlog", linthresh=1e-6)
    ax_cost.legend(loc="upper right", fontsize=8)
    ax_cost.grid(True, alpha=0.3)

    for column in _METRIC_COLUMNS:
        ax_metric.plot(frames, [r[column] for r in rows], "-o", label=column, markersize=3)
    ax_metric.set_xlabel("frame")
    ax_metric.set_ylabel("metric")
    ax_metric.legend(loc="upper right", fontsize=8)
    ax_metric.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_compare_report(rows: Sequence[Mapping[str, object]], path: str) -> None:
    """Grouped bars: one cluster per metric, one bar per layout, one PNG."""
    names = [str(r["layout"]) for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / max(len(names), 1)
    for i, (name, row) in enumerate(zip(names, rows)):
        offsets = [k + i * width for k in range(len(_METRIC_COLUMNS))]
        ax.bar(offsets, [float(row[c]) for c in _METRIC_COLUMNS], width, label=name)
    ax.set_xticks([k + width * (len(names) - 1) / 2 for k in range(len(_METRIC_COLUMNS))])
    ax.set_xticklabels(_METRIC_COLUMNS)
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
