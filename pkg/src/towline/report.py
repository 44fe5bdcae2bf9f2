"""Figure rendering for the report path.

Each function takes already-computed data and writes one PNG next to the
delimited files the data came from.  Uses the non-interactive backend so it
works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import DynamicSheet
from .solutions import Quadruple, phi_view

__all__ = ["margin_figure", "solution_figure", "sheet_figure"]


def margin_figure(
    curves: dict[str, tuple[np.ndarray, np.ndarray]],
    path: str | Path,
    target: float | None = None,
    roots: list[float] | None = None,
    xlabel: str = "x",
) -> Path:
    """Plot one or more (x, value) margin curves, optional level and roots."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, (xs, ys) in curves.items():
        ax.plot(xs, ys, label=label, linewidth=1.2)
    if target is not None:
        ax.axhline(target, color="grey", linestyle="--", linewidth=0.8)
    for r in roots or []:
        ax.axvline(r, color="crimson", linestyle=":", linewidth=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("margin")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def solution_figure(q: Quadruple, path: str | Path) -> Path:
    """Two panels: stakes over the window and payoffs over the trail."""
    idx = np.arange(q.lo, q.hi + 1)
    idx_full = np.arange(q.lo - 1, q.hi + 2)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    ax1.plot(idx, q.a, "o-", label="a (right mover)", markersize=3)
    ax1.plot(idx, q.b, "s-", label="b (left mover)", markersize=3)
    ax1.set_yscale("log")
    ax1.set_xlabel("vertex")
    ax1.set_ylabel("stake")
    try:
        k = phi_view(q).battlefield
        ax1.axvline(k, color="grey", linestyle="--", linewidth=0.8)
    except ValueError:
        pass
    ax1.legend(fontsize=8)
    ax2.plot(idx_full, q.m, "o-", label="m (right mover)", markersize=3)
    ax2.plot(idx_full, q.n, "s-", label="n (left mover)", markersize=3)
    ax2.set_xlabel("vertex")
    ax2.set_ylabel("mean payoff")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def sheet_figure(sheet: DynamicSheet, path: str | Path) -> Path:
    """Stake and payoff rows of a backward evolution, coloured by time."""
    K = sheet.K
    open_idx = np.arange(-K, K + 1)
    full_idx = np.arange(-K - 1, K + 2)
    n_rows = len(sheet.times)
    cmap = plt.get_cmap("inferno")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    for r in range(n_rows):
        colour = cmap(0.1 + 0.8 * r / max(n_rows - 1, 1))
        ax1.plot(open_idx, sheet.a_rows[r], color=colour, linewidth=0.9)
        ax2.plot(full_idx, sheet.m_rows[r], color=colour, linewidth=0.9)
    ax1.set_xlabel("vertex")
    ax1.set_ylabel("a stake")
    ax2.set_xlabel("vertex")
    ax2.set_ylabel("m payoff")
    fig.suptitle(f"backward evolution, {sheet.horizon} steps, rows every stride")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
