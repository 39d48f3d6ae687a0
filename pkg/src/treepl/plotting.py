"""Figure rendering for the report commands.

Figures are built on :class:`matplotlib.figure.Figure` directly (no pyplot
state), so rendering is safe from worker threads and needs no display.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .model import ModelTable, eval_poly

RC = {
    "figsize": (6.4, 4.0),
    "dpi": 150,
    "fontsize": 9,
}


def _new_figure():
    fig = Figure(figsize=RC["figsize"], dpi=RC["dpi"])
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    ax.grid(True, linewidth=0.4, alpha=0.6)
    ax.tick_params(labelsize=RC["fontsize"])
    return fig, ax


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    return path


def figure_path(data_path) -> Path:
    """``results.csv`` -> ``results.png``."""
    return Path(data_path).with_suffix(".png")


def plot_curves(rows, path) -> Path:
    """Path loss versus reception angle, one line per bandwidth."""
    by_bw: dict[float, list] = {}
    for r in rows:
        by_bw.setdefault(r.bandwidth_mhz, []).append((r.alpha_deg, r.pl_db))
    fig, ax = _new_figure()
    for bw in sorted(by_bw):
        a, pl = zip(*sorted(by_bw[bw]))
        ax.plot(a, pl, linewidth=1.2, label=f"B = {bw:g} MHz")
    ax.set_xlabel("Reception angle [deg]", fontsize=RC["fontsize"])
    ax.set_ylabel("Path loss [dB]", fontsize=RC["fontsize"])
    ax.legend(fontsize=RC["fontsize"] - 1)
    return _save(fig, path)


def plot_fit(
    points: Mapping[float, Sequence[tuple[float, float]]],
    table: ModelTable,
    path,
) -> Path:
    """Fitted cubics over the measured (angle, PL) points."""
    fig, ax = _new_figure()
    lo, hi = table.valid_angle_range
    grid = np.linspace(lo, hi, 321)
    for bw, coeffs in table.entries:
        line = ax.plot(grid, [eval_poly(math.radians(a), coeffs) for a in grid], linewidth=1.2,
                       label=f"B = {bw / 1e6:g} MHz")
        pts = points.get(bw, [])
        if pts:
            a, pl = zip(*pts)
            ax.plot(a, pl, "o", markersize=3, color=line[0].get_color())
    ax.set_xlabel("Reception angle [deg]", fontsize=RC["fontsize"])
    ax.set_ylabel("Path loss [dB]", fontsize=RC["fontsize"])
    ax.legend(fontsize=RC["fontsize"] - 1)
    return _save(fig, path)


def plot_results(results, path) -> Path:
    fig, ax = _new_figure()
    a = [r.angle_deg for r in results]
    pl = [r.pl_db for r in results]
    ax.plot(a, pl, "o-", markersize=4, linewidth=0.8)
    ax.set_xlabel("Reception angle [deg]", fontsize=RC["fontsize"])
    ax.set_ylabel("Path loss [dB]", fontsize=RC["fontsize"])
    if results:
        ax.set_title(f"B = {results[0].bandwidth_hz / 1e6:g} MHz", fontsize=RC["fontsize"])
    return _save(fig, path)


def plot_ecdf(ecdfs: Mapping[str, object], path) -> Path:
    """Step plot of one or more ECDFs keyed by legend label."""
    fig, ax = _new_figure()
    for label, e in ecdfs.items():
        x = np.concatenate(([e.values[0]], e.values))
        y = np.concatenate(([0.0], e.probabilities))
        ax.step(x, y, where="post", linewidth=1.0, label=label)
    ax.set_xlabel("Relative received power [dB]", fontsize=RC["fontsize"])
    ax.set_ylabel("ECDF", fontsize=RC["fontsize"])
    ax.set_ylim(0, 1.02)
    if len(ecdfs) > 1:
        ax.legend(fontsize=RC["fontsize"] - 1)
    return _save(fig, path)
