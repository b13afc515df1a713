"""Matplotlib figure rendering for the CLI report paths.

Everything here writes PNG files next to the delimited/JSON outputs;
nothing is shown interactively (Agg backend).
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .density import DensityMap, count_from_density  # noqa: E402
from .evaluation import DensityLevel, EvalRecord, EvalReport  # noqa: E402

_LEVEL_COLORS = {
    DensityLevel.LOW: "tab:green",
    DensityLevel.MEDIUM: "tab:orange",
    DensityLevel.HIGH: "tab:red",
}


def render_density_figure(dmap: DensityMap, out_path: str | Path, title: str = "") -> Path:
    """Heatmap of a density map with its integrated count in the corner."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(6, 6 * dmap.height / max(dmap.width, 1)))
    im = ax.imshow(dmap.values, cmap="jet", interpolation="nearest")
    ax.set_title(title)
    ax.set_axis_off()
    ax.text(
        0.98, 0.02, f"{count_from_density(dmap):.1f}",
        transform=ax.transAxes, ha="right", va="bottom",
        color="white", fontsize=14, fontweight="bold",
    )
    fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return out_path


def render_metrics_by_level(report: EvalReport, out_path: str | Path) -> Path:
    """Grouped bar chart of MAE/RMSE per density level plus overall."""
    out_path = Path(out_path)
    names, maes, rmses = [], [], []
    for level in DensityLevel:
        stats = report.levels[level]
        if stats.n_images:
            names.append(f"{level.value}\n(n={stats.n_images})")
            maes.append(stats.mae)
            rmses.append(stats.rmse)
    names.append(f"overall\n(n={report.overall.n_images})")
    maes.append(report.overall.mae or 0.0)
    rmses.append(report.overall.rmse or 0.0)

    x = range(len(names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(1.8 * len(names) + 2, 4))
    ax.bar([i - width / 2 for i in x], maes, width, label="MAE", color="tab:blue")
    ax.bar([i + width / 2 for i in x], rmses, width, label="RMSE", color="tab:purple")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names)
    ax.set_ylabel("count error")
    ax.set_title("Counting error by density level")
    ax.legend()
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return out_path


def render_count_scatter(records: Sequence[EvalRecord], out_path: str | Path) -> Path:
    """Predicted vs ground-truth counts, colored by stratum, with the y=x line."""
    out_path = Path(out_path)
    fig, ax = plt.subplots(figsize=(5, 5))
    for level in DensityLevel:
        pts = [(r.gt_count, r.pred_count) for r in records if r.level is level]
        if pts:
            xs, ys = zip(*pts)
            ax.scatter(xs, ys, s=18, alpha=0.75, color=_LEVEL_COLORS[level], label=level.value)
    top = max(
        [r.gt_count for r in records] + [r.pred_count for r in records] + [1.0]
    )
    ax.plot([0, top], [0, top], ls="--", lw=1, color="gray")
    ax.set_xlabel("ground-truth count")
    ax.set_ylabel("predicted count")
    ax.set_title("Predicted vs ground-truth counts")
    ax.legend()
    fig.savefig(out_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return out_path


def render_eval_figures(
    report: EvalReport, records: Sequence[EvalRecord], out_dir: str | Path
) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        render_metrics_by_level(report, out_dir / "metrics_by_level.png"),
        render_count_scatter(records, out_dir / "counts_scatter.png"),
    ]
