"""Composite Gauss-Legendre rules on graded, geometric and refined meshes.

Weakly singular integrands of the form u**(sigma-1) near an endpoint are
handled by clustering panel edges at that endpoint, either algebraically
(power grading) or geometrically (log-uniform).  Gauss nodes never touch
panel edges, so the singular point itself is never evaluated.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import DomainError


@lru_cache(maxsize=32)
def gauss_rule(n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    x, w = sp.roots_legendre(n)
    return x, w


def composite_gauss(edges: np.ndarray, nodes_per_panel: int):
    """Flattened nodes and weights of a panel-wise Gauss rule.

    ``edges`` is an increasing array of panel boundaries; zero-width
    panels (possible after aggressive grading in floating point) are
    dropped.
    """
    edges = np.asarray(edges, dtype=float)
    widths = np.diff(edges)
    keep = widths > 0
    lo = edges[:-1][keep]
    h = widths[keep]
    gx, gw = gauss_rule(nodes_per_panel)
    nodes = lo[:, None] + (gx[None, :] + 1.0) * (h[:, None] / 2.0)
    weights = np.broadcast_to(gw[None, :], nodes.shape) * (h[:, None] / 2.0)
    return nodes.ravel(), weights.ravel()


def graded_edges(length: float, n_panels: int, exponent: float) -> np.ndarray:
    """Panel edges on [0, length] clustered at 0 as (j/n)**exponent."""
    if length <= 0:
        raise DomainError(f"mesh length must be positive, got {length}")
    j = np.arange(n_panels + 1, dtype=float) / n_panels
    return length * j ** exponent


def geometric_edges(lo: float, hi: float, n_panels: int) -> np.ndarray:
    """Log-uniform panel edges on [lo, hi], 0 < lo < hi."""
    if not 0 < lo < hi:
        raise DomainError(f"need 0 < lo < hi, got ({lo}, {hi})")
    return np.geomspace(lo, hi, n_panels + 1)


def refined_edges(length: float, n_base: int, focus: float,
                  min_width: float) -> np.ndarray:
    """Uniform edges on [0, length] plus a geometric cluster around focus.

    Extra edges at focus +/- length * 2**-j are inserted until the offset
    falls below ``min_width``, resolving integrand features that sharpen
    toward the focus point.
    """
    edges = list(np.linspace(0.0, length, n_base + 1))
    off = length / 4.0
    while off > min_width:
        for e in (focus - off, focus + off):
            if 0.0 < e < length:
                edges.append(e)
        off /= 2.0
    if 0.0 < focus < length:
        edges.append(focus)
    out = np.unique(np.asarray(edges))
    return out
