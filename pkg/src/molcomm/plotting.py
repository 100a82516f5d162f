"""Figure rendering for the CLI report paths.

Figures are built on :class:`matplotlib.figure.Figure` directly (no pyplot
state) and saved without timestamp metadata so identical inputs give
identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
}

# single column width, golden ratio
FIG_SIZE = (3.4, 3.4 * 0.618)


def _new_figure() -> tuple[Figure, object]:
    fig = Figure(figsize=FIG_SIZE, dpi=150, layout="constrained")
    ax = fig.add_subplot()
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    ax.tick_params(direction="out", length=3)
    return fig, ax


def _save(fig: Figure, path) -> Path:
    import matplotlib

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = path.suffix.lstrip(".").lower() or "png"
    # drop timestamps so output is byte-stable across runs
    metadata = {"png": {"Software": None}, "svg": {"Date": None},
                "pdf": {"CreationDate": None}}.get(fmt)
    with matplotlib.rc_context(STYLE | {"svg.hashsalt": "molcomm"}):
        fig.savefig(path, format=fmt, metadata=metadata)
    return path


def plot_impulse(times, values, t_peak: float, c_max: float, path) -> Path:
    """Received concentration after one release, with the peak marked."""
    with _style():
        fig, ax = _new_figure()
        ax.plot(times, values, color="k")
        ax.axvline(t_peak, color="0.5", ls="--", lw=0.8)
        ax.axhline(c_max, color="0.5", ls=":", lw=0.8)
        ax.set_xlabel("time since release (s)")
        ax.set_ylabel("concentration (molecules/cm$^3$)")
        ax.set_xlim(0, float(np.max(times)))
        ax.set_ylim(bottom=0)
    return _save(fig, path)


def plot_throughput(rows, path) -> Path:
    """End-to-end throughput against hop count."""
    hops = [r[0] for r in rows]
    th = [r[1] for r in rows]
    with _style():
        fig, ax = _new_figure()
        ax.plot(hops, th, marker="o", ms=3, color="k")
        ax.set_xlabel("hops per route N")
        ax.set_ylabel("throughput (bit/s)")
        ax.set_xlim(left=0)
        ax.set_ylim(bottom=0)
    return _save(fig, path)


def plot_ber_sweep(depths, bers, path, label: str | None = None) -> Path:
    """Bit error rate against compensated history depth."""
    with _style():
        fig, ax = _new_figure()
        ax.plot(depths, bers, marker="s", ms=3, color="k", label=label)
        ax.set_xlabel("history depth m")
        ax.set_ylabel("bit error rate")
        ax.set_ylim(bottom=0)
        if label:
            ax.legend(frameon=False)
    return _save(fig, path)


def _style():
    import matplotlib

    return matplotlib.rc_context(STYLE)
