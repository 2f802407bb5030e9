"""Figure rendering for the evaluation report.

Each function writes one PNG next to the delimited outputs. All plotting goes
through the Agg backend so reports render identically on headless machines.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MetricsReport
from .monitor import Outcome, ViolationProfile


def plot_feature_violations(profile: ViolationProfile, feature_names, path) -> Path:
    """Bar chart of validation violation counts per feature with the mean threshold."""
    path = Path(path)
    counts = profile.counts
    positions = np.arange(len(counts))
    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(counts)), 4))
    ax.bar(positions, counts, color="#4878a8")
    ax.axhline(profile.threshold_V, color="#c44e52", linestyle="--",
               label=f"mean threshold = {profile.threshold_V:.2f}")
    ax.set_xticks(positions)
    ax.set_xticklabels(feature_names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("validation rows violating")
    ax.set_title("Input-interval violations per feature (validation)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_verdict_distribution(counts: dict[str, int], path) -> Path:
    """Bar chart of verdict outcomes over the unseen set."""
    path = Path(path)
    order = [Outcome.CORRECT.value, Outcome.INCORRECT.value, Outcome.UNCERTAIN.value]
    values = [counts.get(name, 0) for name in order]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(order, values, color=["#55a868", "#c44e52", "#dd8452"])
    for i, value in enumerate(values):
        ax.text(i, value, str(value), ha="center", va="bottom")
    ax.set_ylabel("rows")
    ax.set_title("Monitor verdicts on unseen data")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_confusion_matrix(report: MetricsReport, path) -> Path:
    """2x2 heatmap: verdict (rows) against model correctness (columns)."""
    path = Path(path)
    grid = np.array([[report.tp, report.fp], [report.fn, report.tn]], dtype=float)
    fig, ax = plt.subplots(figsize=(4.5, 4))
    image = ax.imshow(grid, cmap="Blues")
    ax.set_xticks([0, 1])
    ax.set_xticklabels(["model right", "model wrong"])
    ax.set_yticks([0, 1])
    ax.set_yticklabels(["verdict Correct", "verdict not Correct"])
    for (i, j), value in np.ndenumerate(grid):
        ax.text(j, i, int(value), ha="center", va="center",
                color="white" if value > grid.max() / 2 else "black")
    fig.colorbar(image, ax=ax, shrink=0.8)
    ax.set_title("Verdicts vs. ground truth")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report_figures(
    out_dir,
    profile: ViolationProfile,
    feature_names,
    counts: dict[str, int],
    report: MetricsReport | None = None,
) -> list[Path]:
    """Render the standard figure set into out_dir and return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        plot_feature_violations(profile, feature_names, out_dir / "violations_per_feature.png"),
        plot_verdict_distribution(counts, out_dir / "verdict_distribution.png"),
    ]
    if report is not None:
        written.append(plot_confusion_matrix(report, out_dir / "confusion_matrix.png"))
    return written
