"""Panel figures from `t,x,u` CSV grids.

A pure consumer of the solver CLI's CSV contract: one panel per input
file (typically one per fractional order), rendered either as line
families over time at fixed positions or as a surface.  No numerics
beyond reading the grids.
"""

from .panels import GridData, PanelSpec, load_grid, render, slice_positions

__version__ = "0.1.0"

__all__ = ["GridData", "PanelSpec", "load_grid", "render", "slice_positions"]
