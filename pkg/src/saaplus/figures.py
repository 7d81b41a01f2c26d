"""Matplotlib figure rendering for evaluation reports.

Figures land next to the delimited outputs: a per-category score chart for
plain evaluations and a grouped comparison chart for ablation tables.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .datasets.evaluate import AblationTable, EvalReport


def save_eval_figure(report: EvalReport, path: str | Path) -> None:
    categories = [c.category for c in report.categories]
    scores = [c.max_f1_pixel for c in report.categories]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.2 * len(categories) + 2.0), 3.2))
    ax.bar(categories, scores, color="#41618f")
    ax.axhline(report.mean_max_f1_pixel, color="#b3422e", linestyle="--", linewidth=1.0,
               label=f"mean = {report.mean_max_f1_pixel:.3f}")
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("max-F1-pixel")
    ax.set_title(f"{report.dataset} ({report.mode})")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_ablation_figure(table: AblationTable, path: str | Path) -> None:
    labels = []
    means = []
    for row in table.rows:
        labels.append(row["label"])
        means.append(row["report"].mean_max_f1_pixel if "report" in row else 0.0)
    x = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(labels) + 2.0), 3.2))
    bars = ax.bar(x, means, color=["#8a8a8a"] * (len(labels) - 1) + ["#41618f"])
    for bar, value in zip(bars, means):
        ax.text(bar.get_x() + bar.get_width() / 2, value + 0.01, f"{value:.3f}",
                ha="center", va="bottom", fontsize=8)
    ax.set_xticks(x, labels)
    ax.set_ylim(0.0, 1.1)
    ax.set_ylabel("max-F1-pixel (dataset mean)")
    ax.set_title(f"{table.dataset}: prompt-family ablations")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
