"""SVG line charts for performance profiles and gradient-norm histories."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from hfnewton.schemas import ProfileTable  # noqa: E402


def plot_profile(table: ProfileTable, path: Path, title: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        for solver in table.solvers:
            ax.step(table.taus, table.curve_values(solver), where="post", label=solver)
        ax.set_xlabel("τ")
        ax.set_ylabel("P(r ≤ τ)")
        ax.set_ylim(0.0, 1.05)
        ax.set_title(title or table.label)
        ax.legend(loc="lower right")
        ax.grid(True, alpha=0.3)
        fig.savefig(path, format="svg", bbox_inches="tight")
    finally:
        plt.close(fig)
    return path


def plot_gradient_curves(curves: dict[str, list[float]], path: Path, title: str = "") -> Path:
    """‖∇f(x_k)‖ against k on a log scale, one line per solver."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        for solver, gnorms in curves.items():
            ax.semilogy(range(1, len(gnorms) + 1), gnorms, marker=".", label=solver)
        ax.set_xlabel("iteration k")
        ax.set_ylabel("‖∇f(x_k)‖")
        ax.set_title(title)
        ax.legend(loc="upper right")
        ax.grid(True, which="both", alpha=0.3)
        fig.savefig(path, format="svg", bbox_inches="tight")
    finally:
        plt.close(fig)
    return path
