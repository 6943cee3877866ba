"""Static figures: interaction regions over the copula grid and power curves.

Figures are built with :class:`matplotlib.figure.Figure` directly (no pyplot
state) and written with a fixed SVG hash salt and no timestamp, so repeated
runs produce identical files.
"""
from __future__ import annotations

import math
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .expansion import CopulaSet, binary_expand
from .interactions import InteractionIndex, parity_signs

SHADE = "#4a7fc1"

_RC = {
    "svg.hashsalt": "bet",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.8,
}


def region_signs(idx: InteractionIndex) -> np.ndarray:
    """Sign of ``idx`` on every cell, shaped ``(2**d2, 2**d1)`` as ``[v_cell, u_cell]``."""
    d1, d2 = idx.d1, idx.d2
    cells = np.arange(1 << (d1 + d2))
    m = idx.packed
    signs = parity_signs(d1 + d2)[m] * parity_signs(d1 + d2)[cells & m]
    return signs.reshape(1 << d1, 1 << d2).T


def region_counts(copula: CopulaSet, idx: InteractionIndex) -> tuple[int, int]:
    """Number of observations in the positive and negative regions."""
    depth = max(idx.d1, idx.d2)
    bu, bv = binary_expand(copula, depth)
    cu = bu.cell_indices(idx.d1)
    cv = bv.cell_indices(idx.d2)
    sign = region_signs(idx)[cv, cu]
    return int((sign > 0).sum()), int((sign < 0).sum())


def draw_region(ax, copula: CopulaSet, idx: InteractionIndex, annotate: bool = True):
    signs = region_signs(idx)
    nu, nv = 1 << idx.d1, 1 << idx.d2
    for j in range(nv):
        for i in range(nu):
            if signs[j, i] < 0:
                ax.add_patch(Rectangle((i / nu, j / nv), 1 / nu, 1 / nv,
                                       facecolor=SHADE, alpha=0.45, linewidth=0))
    for i in range(1, nu):
        ax.axvline(i / nu, color="0.6", lw=0.5)
    for j in range(1, nv):
        ax.axhline(j / nv, color="0.6", lw=0.5)
    ax.scatter(copula.u, copula.v, s=6, c="k", linewidths=0)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_xticks([0, 0.5, 1])
    ax.set_yticks([0, 0.5, 1])
    title = idx.label
    if annotate:
        pos, neg = region_counts(copula, idx)
        title += f"  (+{pos} / -{neg})"
    ax.set_title(title)


def _save(fig: Figure, path):
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def emit_region_plot(copula: CopulaSet, idx: InteractionIndex, path) -> Figure:
    """Scatter of ``(u, v)`` with the negative cells of ``idx`` shaded."""
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(4, 4))
        ax = fig.add_subplot()
        draw_region(ax, copula, idx)
        ax.set_xlabel("U")
        ax.set_ylabel("V")
        fig.tight_layout()
    _save(fig, path)
    return fig


def emit_region_panels(copula: CopulaSet, d1: int, d2: int, path) -> Figure:
    """One panel per non-trivial interaction at depths ``(d1, d2)``."""
    indices = [InteractionIndex.from_packed(m, d1, d2) for m in range(1, 1 << (d1 + d2))]
    ncol = min(4, len(indices))
    nrow = math.ceil(len(indices) / ncol)
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(2.6 * ncol, 2.8 * nrow))
        for k, idx in enumerate(indices):
            draw_region(fig.add_subplot(nrow, ncol, k + 1), copula, idx)
        fig.tight_layout()
    _save(fig, path)
    return fig


def plot_power_curves(rows: Sequence, path) -> Figure:
    """Power against noise level, one line per (scenario, method)."""
    series = {}
    for r in rows:
        series.setdefault((r.scenario, r.method), []).append((r.level, r.power, r.se))
    scenarios = sorted({s for s, _ in series}, key=lambda s: [r.scenario for r in rows].index(s))
    ncol = min(3, len(scenarios))
    nrow = math.ceil(len(scenarios) / ncol)
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(3.2 * ncol, 2.6 * nrow))
        for k, scen in enumerate(scenarios):
            ax = fig.add_subplot(nrow, ncol, k + 1)
            for (s, method), pts in series.items():
                if s != scen:
                    continue
                pts.sort()
                lv, pw, se = (np.array(t) for t in zip(*pts))
                ax.errorbar(lv, pw, yerr=2 * se, marker="o", ms=3, lw=1, capsize=2, label=method)
            ax.set_ylim(-0.02, 1.02)
            ax.set_title(scen)
            ax.set_xlabel("noise level")
            ax.set_ylabel("power")
            ax.legend(frameon=False, fontsize=7)
        fig.tight_layout()
    _save(fig, path)
    return fig
