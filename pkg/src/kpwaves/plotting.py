"""PNG figures for fields, sweeps, singular curves and dispersion tables.

Figures are drawn on a bare Agg canvas rather than through pyplot, so no
global state is touched and the output bytes depend only on the inputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_META = {"Software": None}


def _figure(size=(5.0, 4.2)):
    fig = Figure(figsize=size, dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", metadata=_META)
    return path


def _extent(grid):
    return (grid.x_min, grid.x_max, grid.y_min, grid.y_max)


def plot_field(fld, path, title: str | None = None, cmap: str = "gray", curve=None) -> Path:
    """Gray-scale image of a Field; masked cells are drawn black."""
    fig = _figure()
    ax = fig.add_subplot()
    v = np.ma.masked_array(fld.values, fld.singular_mask | ~np.isfinite(fld.values))
    cmap_obj = matplotlib.colormaps[cmap].with_extremes(bad="black")
    im = ax.imshow(v, origin="lower", extent=_extent(fld.grid), cmap=cmap_obj,
                   interpolation="nearest", aspect="auto")
    fig.colorbar(im, ax=ax, label=str(fld.quantity))
    if curve is not None:
        for seg in curve.segments:
            ax.plot(seg[:, 0], seg[:, 1], color="tab:red", lw=0.8)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"t = {fld.grid.t:g}")
    fig.tight_layout()
    return _save(fig, path)


def plot_sweep(frames, path, event=None) -> Path:
    """Raw maximum over unmasked cells against t."""
    fig = _figure((5.0, 3.4))
    ax = fig.add_subplot()
    t = [fr.t for fr in frames]
    ax.plot(t, [fr.raw_max for fr in frames], "o-", color="k", ms=3)
    if event is not None:
        ax.axhline(event.background_value, color="tab:blue", ls="--", lw=0.8, label="background")
        ax.axhline(3 * event.background_value, color="tab:red", ls=":", lw=0.8, label="3x background")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel("t")
    ax.set_ylabel("max f")
    fig.tight_layout()
    return _save(fig, path)


def plot_curve(curve, grid, path) -> Path:
    fig = _figure()
    ax = fig.add_subplot()
    for seg in curve.segments:
        ax.plot(seg[:, 0], seg[:, 1], color="k", lw=1.0)
    ax.set_xlim(grid.x_min, grid.x_max)
    ax.set_ylim(grid.y_min, grid.y_max)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"tau = 0 at t = {grid.t:g}")
    fig.tight_layout()
    return _save(fig, path)


def plot_dispersion(k, exact, approx, path) -> Path:
    fig = _figure((5.0, 3.4))
    ax = fig.add_subplot()
    ax.plot(k, exact, "k-", label="exact")
    ax.plot(k, approx, "k--", label="KP")
    ax.set_xlabel("k")
    ax.set_ylabel("omega")
    ax.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)
