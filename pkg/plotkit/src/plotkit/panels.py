"""Loading and rendering of solver output grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class GridMismatch(ValueError):
    """Input CSVs do not share one (t, x) node set."""


@dataclass
class GridData:
    """One `t,x,u` file parsed into a tensor grid."""

    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    label: str


@dataclass
class PanelSpec:
    """What to render: one panel per CSV, shared axes and slices."""

    csv_paths: list
    labels: list = field(default_factory=list)
    out_path: str = "panels.png"
    style: str = "lines"           # or "surface"
    slice_fractions: tuple = (0.25, 0.5, 0.75)


def load_grid(path, label: str | None = None) -> GridData:
    """Parse one CSV of `t,x,u` rows in t-major order."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "t,x,u":
        raise ValueError(f"{path}: expected header 't,x,u'")
    rows = [line.split(",") for line in lines[1:]]
    t_vals = [float(r[0]) for r in rows]
    x_vals = [float(r[1]) for r in rows]
    u_vals = [float(r[2]) for r in rows]
    t = list(dict.fromkeys(t_vals))
    x = list(dict.fromkeys(x_vals))
    if len(t) * len(x) != len(rows):
        raise ValueError(f"{path}: rows do not form a tensor grid")
    u = np.array(u_vals).reshape(len(t), len(x))
    return GridData(t=np.array(t), x=np.array(x), u=u,
                    label=label or Path(path).stem)


def _check_shared_nodes(grids: list) -> None:
    ref = grids[0]
    for g in grids[1:]:
        if len(g.t) != len(ref.t) or len(g.x) != len(ref.x) or \
                not np.array_equal(g.t, ref.t) or not np.array_equal(g.x, ref.x):
            raise GridMismatch(
                f"{g.label}: node set differs from {ref.label} "
                f"(t: {len(g.t)} vs {len(ref.t)} nodes, first/last "
                f"{g.t[0]:.6g}/{g.t[-1]:.6g} vs {ref.t[0]:.6g}/{ref.t[-1]:.6g}; "
                f"x: {len(g.x)} vs {len(ref.x)} nodes)")


def slice_positions(x: np.ndarray, fractions) -> list:
    """Indices of the grid nodes nearest the fractional positions."""
    span = x[-1] - x[0]
    return [int(np.argmin(np.abs(x - (x[0] + f * span)))) for f in fractions]


def render(spec: PanelSpec) -> str:
    """Render one figure with a panel per CSV; returns the output path.

    Line style draws u over t at the slice positions; surface style draws
    the full (t, x) sheet.  All panels share the vertical scale so the
    ordering across panels is visible.
    """
    if not spec.csv_paths:
        raise ValueError("no CSV inputs")
    labels = list(spec.labels) or [None] * len(spec.csv_paths)
    if len(labels) != len(spec.csv_paths):
        raise ValueError("labels must match the CSV list")
    grids = [load_grid(p, lbl) for p, lbl in zip(spec.csv_paths, labels)]
    _check_shared_nodes(grids)

    n = len(grids)
    if spec.style == "surface":
        fig, axes = plt.subplots(1, n, figsize=(4.2 * n, 3.6),
                                 subplot_kw={"projection": "3d"})
    else:
        fig, axes = plt.subplots(1, n, figsize=(4.2 * n, 3.4), sharey=True)
    axes = np.atleast_1d(axes)
    u_min = min(float(g.u.min()) for g in grids)
    u_max = max(float(g.u.max()) for g in grids)
    pad = 0.05 * max(u_max - u_min, 1e-12)

    for ax, g in zip(axes, grids):
        if spec.style == "surface":
            T, X = np.meshgrid(g.t, g.x, indexing="ij")
            ax.plot_surface(T, X, g.u, cmap="viridis", linewidth=0)
            ax.set_zlim(u_min - pad, u_max + pad)
            ax.set_ylabel("x")
        else:
            for idx in slice_positions(g.x, spec.slice_fractions):
                ax.plot(g.t, g.u[:, idx], label=f"x={g.x[idx]:.2f}")
            ax.set_ylim(u_min - pad, u_max + pad)
            ax.grid(True, alpha=0.3)
            ax.legend(fontsize=8)
        ax.set_xlabel("t")
        ax.set_title(g.label)
    axes[0].set_ylabel("u" if spec.style != "surface" else "")
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=130)
    plt.close(fig)
    return spec.out_path
