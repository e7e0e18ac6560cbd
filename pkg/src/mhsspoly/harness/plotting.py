"""Static residual-history figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_residuals(histories: dict, path, title: str = "", tol: float | None = None) -> Path:
    """Write a semilog plot of relative residual against iteration.

    ``histories`` maps a legend label to a sequence of relative residuals.
    """
    path = Path(path)
    # svg output embeds a hash salt unless fixed, which breaks byte-identical reruns
    with matplotlib.rc_context({"svg.hashsalt": "mhsspoly", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for label, hist in histories.items():
            ax.semilogy(range(len(hist)), hist, label=label, linewidth=1.2)
        if tol is not None:
            ax.axhline(tol, color="0.5", linestyle=":", linewidth=0.8)
        ax.set_xlabel("iteration")
        ax.set_ylabel("relative residual")
        if title:
            ax.set_title(title)
        ax.grid(True, which="major", alpha=0.3)
        if len(histories) > 1:
            ax.legend(fontsize="small")
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
    return path
