"""Matplotlib rendering for the report pipeline: instance maps, footprint
grids, and per-algorithm performance charts, written straight to files."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .space import Footprint

_DPI = 150


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_points_scatter(
    points: dict[str, list[tuple[float, float]]], path: str, title: str
) -> None:
    """Scatter of projected instances, one colour per label (e.g. the best
    algorithm per instance)."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for label in sorted(points):
        xy = points[label]
        if not xy:
            continue
        xs, ys = zip(*xy)
        ax.scatter(xs, ys, s=14, alpha=0.75, label=label)
    ax.set_xlabel("z1")
    ax.set_ylabel("z2")
    ax.set_title(title)
    if len(points) > 1:
        ax.legend(fontsize=7, markerscale=0.9)
    _save(fig, path)


def save_footprint_map(
    fp: Footprint,
    points: list[tuple[float, float, bool]],
    path: str,
    title: str,
) -> None:
    """Good-fraction heat map of the footprint grid with the raw points on
    top; selected footprint cells are outlined."""
    g = fp.grid_cells
    frac = np.full((g, g), np.nan)
    for (cx, cy), (total, good) in fp.cells.items():
        frac[cy, cx] = good / total
    x_min, x_max, y_min, y_max = fp.bounds
    extent = (x_min, x_max or x_min + 1.0, y_min, y_max or y_min + 1.0)

    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(
        frac,
        origin="lower",
        extent=extent,
        aspect="auto",
        cmap="RdYlBu",
        vmin=0.0,
        vmax=1.0,
        alpha=0.6,
    )
    good_pts = [(x, y) for x, y, ok in points if ok]
    bad_pts = [(x, y) for x, y, ok in points if not ok]
    if bad_pts:
        ax.scatter(*zip(*bad_pts), s=8, c="firebrick", marker="x", label="not good")
    if good_pts:
        ax.scatter(*zip(*good_pts), s=8, c="navy", marker="o", label="good")
    ax.set_xlabel("z1")
    ax.set_ylabel("z2")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.colorbar(im, ax=ax, label="good fraction per cell")
    _save(fig, path)


def save_feasibility_bars(pct_by_algorithm: dict[str, float], path: str) -> None:
    names = sorted(pct_by_algorithm, key=pct_by_algorithm.get, reverse=True)
    values = [pct_by_algorithm[n] for n in names]
    fig, ax = plt.subplots(figsize=(7, 4))
    bars = ax.bar(names, values, color="steelblue")
    ax.bar_label(bars, fmt="%.0f%%", fontsize=8)
    ax.set_ylabel("feasible solutions (%)")
    ax.set_ylim(0, 105)
    ax.tick_params(axis="x", rotation=30)
    _save(fig, path)


def save_runtime_box(minutes_by_algorithm: dict[str, list[float]], path: str,
                     label: str = "normalized CPU minutes") -> None:
    names = [n for n in sorted(minutes_by_algorithm) if minutes_by_algorithm[n]]
    if not names:
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.boxplot([minutes_by_algorithm[n] for n in names], tick_labels=names)
    ax.set_ylabel(label)
    ax.set_yscale("log")
    ax.tick_params(axis="x", rotation=30)
    _save(fig, path)


def save_gap_bars(gap_by_algorithm: dict[str, float], path: str) -> None:
    names = sorted(gap_by_algorithm, key=gap_by_algorithm.get)
    values = [100.0 * gap_by_algorithm[n] for n in names]
    fig, ax = plt.subplots(figsize=(7, 4))
    bars = ax.bar(names, values, color="darkseagreen")
    ax.bar_label(bars, fmt="%.1f", fontsize=8)
    ax.set_ylabel("mean relative gap (%)")
    ax.tick_params(axis="x", rotation=30)
    _save(fig, path)
