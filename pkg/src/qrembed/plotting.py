"""Figure rendering for the eval and bench report paths.

Figures are written next to the delimited report output; the Agg backend
is forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_eval_figure(report, path):
    """Mean +/- std Micro/Macro-F1 vs train ratio."""
    ratios = report.ratios()
    agg = np.array([report.aggregate(r) for r in ratios])
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.asarray(ratios)
    ax.errorbar(x, 100 * agg[:, 0], yerr=100 * agg[:, 1], marker="o",
                capsize=3, label="Micro-F1")
    ax.errorbar(x, 100 * agg[:, 2], yerr=100 * agg[:, 3], marker="s",
                capsize=3, label="Macro-F1")
    ax.set_xlabel("train ratio")
    ax.set_ylabel("F1 (%)")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_bench_figure(rows, stages, path):
    """Stacked bars of per-stage seconds; one bar per (b, q) configuration."""
    labels = [f"b={r['b']},q={r['q']}" for r in rows]
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(rows)), 4))
    bottoms = np.zeros(len(rows))
    for stage in stages:
        vals = np.array([r.get(stage, 0.0) for r in rows])
        ax.bar(labels, vals, bottom=bottoms, label=stage)
        bottoms += vals
    ax.set_ylabel("seconds")
    ax.tick_params(axis="x", rotation=45)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
