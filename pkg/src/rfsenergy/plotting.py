"""Figure rendering for evaluation reports (headless, file output only)."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport, FewShotResult


def _atomic_savefig(fig, path: str | Path) -> None:
    from .ppf import _UMASK

    path = Path(path)
    suffix = path.suffix or ".png"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=suffix)
    os.close(fd)
    try:
        fig.savefig(tmp, dpi=150, bbox_inches="tight")
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(fig)


def plot_roc(report: EvalReport, path: str | Path) -> None:
    """Render the report's ROC curve to an image file."""
    fig, ax = plt.subplots(figsize=(5, 5))
    fpr = [p.fpr for p in report.roc]
    tpr = [p.tpr for p in report.roc]
    ax.plot(fpr, tpr, drawstyle="default", color="tab:blue",
            label=f"{report.method} (AUC {100 * report.auc:.1f}%)")
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    title = report.category or "ROC"
    ax.set_title(title)
    ax.legend(loc="lower right")
    _atomic_savefig(fig, path)


def plot_few_shot(results: Sequence[FewShotResult], path: str | Path) -> None:
    """Render mean AUC versus shot count, with per-repeat scatter."""
    fig, ax = plt.subplots(figsize=(6, 4))
    shots = [r.shots for r in results]
    means = [r.mean_auc for r in results]
    for r in results:
        ax.scatter([r.shots] * len(r.per_repeat_auc), r.per_repeat_auc,
                   s=12, color="tab:gray", alpha=0.5, zorder=1)
    ax.plot(shots, means, marker="o", color="tab:blue", zorder=2, label="mean AUC")
    ax.set_xlabel("training sets (shots)")
    ax.set_ylabel("AUC")
    ax.set_xticks(shots)
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower right")
    _atomic_savefig(fig, path)
