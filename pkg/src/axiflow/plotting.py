"""Static figures of generating curves and diagnostics (SVG via matplotlib)."""
from __future__ import annotations

from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from .geometry import Curve

# stable element ids and no timestamp, so identical runs give identical files
STYLE = {
    "svg.hashsalt": "axiflow",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.0,
}
SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    try:
        fig.savefig(path, **SAVE_KW)
    except OSError as exc:
        raise OSError(f"cannot write figure {path}: {exc}") from exc
    return path


def plot_curves(snapshots: dict, path, title: str = "") -> Path:
    """Overlay snapshot curves and their mirror images across the axis."""
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(5.0, 5.0))
        ax = fig.add_subplot()
        times = sorted(snapshots)
        cmap = matplotlib.colormaps["viridis"]
        for k, t in enumerate(times):
            curve: Curve = snapshots[t]
            nodes = curve.nodes
            if curve.closed:
                nodes = nodes[list(range(curve.n_nodes)) + [0]]
            color = cmap(k / max(len(times) - 1, 1))
            ax.plot(nodes[:, 0], nodes[:, 1], color=color, label=f"t = {t:.4g}")
            ax.plot(-nodes[:, 0], nodes[:, 1], color=color)
        ax.axvline(0.0, color="0.6", linewidth=0.5, linestyle=":")
        ax.set_aspect("equal")
        ax.set_xlabel("r")
        ax.set_ylabel("z")
        if title:
            ax.set_title(title)
        if len(times) <= 12:
            ax.legend(loc="best", fontsize=7, frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def plot_diagnostics(records, path) -> Path:
    """Energy ratio, volume loss and mesh ratio against time."""
    t = [r.t for r in records]
    panels = (("energy_ratio", "E(t)/E(0)"), ("volume_loss", "relative volume change"),
              ("mesh_ratio", "mesh ratio"))
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(5.0, 6.0))
        axes = fig.subplots(len(panels), 1, sharex=True)
        for ax, (name, label) in zip(axes, panels):
            ax.plot(t, [getattr(r, name) for r in records], color="k")
            ax.set_ylabel(label)
        axes[-1].set_xlabel("t")
        fig.tight_layout()
        return _save(fig, path)
