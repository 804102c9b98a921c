"""Assembly of the sub-diffusion solution from its kernel representation.

The solution splits into a part driven by boundary data and forcing
(boundary-kernel and interior-kernel integrals) and a part propagating
the initial profile (initial-kernel integral).  Quadratures follow the
structure of each kernel: boundary integrals are taken in the scaled
variable z = distance / (t - eta)**beta1 where the kernel is a smooth
decaying profile, forcing integrals use a log mesh toward the kernel's
moving singularity plus a graded mesh toward eta = 0, and source
integrals refine around the observation point where the kernel peaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, NodeFailure, NonConvergence
from .greens import (
    DomainSpec,
    floor_exponent,
    flux_series,
    initial_kernel_profile,
    interior_grid_values,
    interior_time_table,
    series_cutoff,
    space_table,
    spatial_order,
)
from .operators import DEFAULT_QUADRATURE, QuadratureSpec, _eval_array
from .quadrule import composite_gauss, geometric_edges, graded_edges, refined_edges
from .specfun import DEFAULT_CONTROL, FracParams, SeriesControl, prabhakar_ml

__all__ = [
    "ProblemSpec",
    "SolutionField",
    "SolutionReport",
    "solve_y",
    "solve_z",
    "solve_u",
    "verify_solution",
    "eigen_relaxation",
    "eigen_forced_linear",
    "max_rel_diff",
]

_COMPAT_TOL = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    """Data of the first initial-boundary value problem.

    Any of the data functions may be None, meaning identically zero;
    present functions should accept numpy arrays.  ``phi0``/``phi1`` are
    the wall values at x = 0 and x = a, ``tau`` the initial profile,
    ``f(t, x)`` the forcing.  Compatibility corners
    (phi0(0) = tau(0), phi1(0) = tau(a)) are checked on construction
    unless ``check_compat=False``.
    """

    domain: DomainSpec
    params: FracParams
    phi0: Callable | None = None
    phi1: Callable | None = None
    tau: Callable | None = None
    f: Callable | None = None
    check_compat: bool = True

    def __post_init__(self):
        if not self.check_compat:
            return
        tau0 = self._corner(self.tau, 0.0)
        tau_a = self._corner(self.tau, self.domain.a)
        phi0_0 = self._corner(self.phi0, 0.0)
        phi1_0 = self._corner(self.phi1, 0.0)
        if abs(phi0_0 - tau0) > _COMPAT_TOL or abs(phi1_0 - tau_a) > _COMPAT_TOL:
            raise DomainError(
                "incompatible corner data: phi0(0) != tau(0) or phi1(0) != tau(a); "
                "pass check_compat=False to build the problem anyway"
            )

    @staticmethod
    def _corner(fn, arg):
        return 0.0 if fn is None else float(_eval_array(fn, np.asarray(arg)))


@dataclass
class SolutionField:
    """u sampled on a (t, x) tensor grid with provenance metadata."""

    t_nodes: np.ndarray
    x_nodes: np.ndarray
    values: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t_nodes = np.asarray(self.t_nodes, dtype=float)
        self.x_nodes = np.asarray(self.x_nodes, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.t_nodes), len(self.x_nodes)):
            raise DomainError(
                f"field shape {self.values.shape} does not match "
                f"{len(self.t_nodes)} t-nodes x {len(self.x_nodes)} x-nodes"
            )
        if np.any(np.diff(self.t_nodes) <= 0) or np.any(np.diff(self.x_nodes) <= 0):
            raise DomainError("node vectors must be strictly increasing")
        if self.t_nodes[0] <= 0:
            raise DomainError("t-nodes must be positive; the initial row is data")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field contains non-finite values")


@dataclass(frozen=True)
class SolutionReport:
    """Numbers reported by verify_solution; NaN residual = grid not FD-aligned."""

    boundary_error: float
    initial_error: float
    residual: float


# --------------------------------------------------------------------------
# pointwise solution parts
# --------------------------------------------------------------------------

def _boundary_term(phi, t: float, x: float, side: str, dom: DomainSpec,
                   p: FracParams, ctl: SeriesControl, q: QuadratureSpec) -> float:
    """Flux-kernel time integral of one wall function at (t, x).

    Integrates in z = d (t-eta)**(-beta1) per image, where the kernel is
    the smooth profile flux_series(z)/z on [z0, cutoff]; images whose z0
    exceeds the cutoff contribute nothing.
    """
    cut = series_cutoff(p.beta1, ctl.k_max)
    ns = np.arange(-ctl.n_images, ctl.n_images + 1, dtype=float)
    args = x + 2.0 * dom.a * ns if side == "left" else x + dom.a * (2.0 * ns + 1.0)
    total = 0.0
    n_panels = max(12, q.n_panels // 2)
    for arg in args:
        d_img = abs(arg)
        if d_img == 0.0:
            continue
        z0 = d_img * t ** (-p.beta1)
        if z0 >= cut:
            continue
        edges = geometric_edges(z0, cut, n_panels)
        z, wz = composite_gauss(edges, q.nodes_per_panel)
        s_of_z = (d_img / z) ** (1.0 / p.beta1)
        fvals = flux_series(z, p.delta * s_of_z ** p.alpha, p, ctl)
        phis = _eval_array(phi, t - s_of_z)
        total += math.copysign(1.0, arg) * float(np.sum(wz * phis * fvals / z)) / p.beta1
    return total


_GRID_NODES = 6  # Gauss nodes per panel in the tensor-grid quadratures


def _forcing_mesh(t: float, p: FracParams, ctl: SeriesControl, q: QuadratureSpec):
    """Elapsed-time nodes for the forcing integral at observation time t.

    Log-uniform half toward s = 0 (kernel boundary layer) floored at the
    overflow-safe exponent, power-graded half toward s = t (forcing may
    carry an integrable eta**(beta-1) singularity).  The deep decades of
    the memory tail carry mass ~ s**(2 beta1) per e-fold and only need
    sparse panels; the top decades get full density.
    """
    s_lo = floor_exponent(p, spatial_order(p.beta1, ctl.k_max))
    if t <= 4.0 * s_lo:
        raise DomainError(f"observation time {t} too small for the forcing mesh")
    n_half = max(12, q.n_panels // 2)
    split = t * 1e-5
    if s_lo < split:
        deep = geometric_edges(s_lo, split, max(6, int(0.35 * math.log(split / s_lo))))
        top = geometric_edges(split, t / 2.0, n_half)
        left = np.concatenate([deep[:-1], top])
    else:
        left = geometric_edges(s_lo, t / 2.0, n_half)
    right = t - graded_edges(t / 2.0, n_half, max(2.0, 3.5 / p.beta))[::-1]
    nodes_l, w_l = composite_gauss(left, _GRID_NODES)
    nodes_r, w_r = composite_gauss(right, _GRID_NODES)
    return np.concatenate([nodes_l, nodes_r]), np.concatenate([w_l, w_r])


def _source_mesh(dom: DomainSpec, x: float, min_width: float,
                 nodes: int = _GRID_NODES):
    edges = refined_edges(dom.a, 8, x, min_width)
    return composite_gauss(edges, nodes)


def _eval_grid(f, t_vals: np.ndarray, x_vals: np.ndarray) -> np.ndarray:
    """f(t, x) on the tensor grid, tolerating scalar-only callables."""
    T, X = np.meshgrid(t_vals, x_vals, indexing="ij")
    try:
        out = np.asarray(f(T, X), dtype=float)
        if out.shape == T.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([[float(f(tv, xv)) for xv in x_vals] for tv in t_vals])


class _GreensEngine:
    """Caches the reusable tables of one problem for grid evaluation."""

    def __init__(self, ps: ProblemSpec, q: QuadratureSpec, ctl: SeriesControl):
        self.ps = ps
        self.q = q
        self.ctl = ctl
        self._time_tables: dict[float, tuple] = {}
        self._space_tables: dict[float, tuple] = {}

    def forcing_time_table(self, t: float):
        if t not in self._time_tables:
            s_nodes, s_wts = _forcing_mesh(t, self.ps.params, self.ctl, self.q)
            tt = interior_time_table(s_nodes, self.ps.params, self.ctl)
            self._time_tables[t] = (tt, s_wts)
        return self._time_tables[t]

    def forcing_space_table(self, x: float):
        if x not in self._space_tables:
            xi_nodes, xi_wts = _source_mesh(self.ps.domain, x,
                                            4e-3 * self.ps.domain.a)
            st = space_table(x, xi_nodes, self.ps.domain,
                             self.ps.params, self.ctl)
            self._space_tables[x] = (st, xi_nodes, xi_wts)
        return self._space_tables[x]

    def forcing_term(self, t: float, x: float) -> float:
        tt, s_wts = self.forcing_time_table(t)
        st, xi_nodes, xi_wts = self.forcing_space_table(x)
        g_vals = interior_grid_values(tt, st)                  # (S, Xi)
        f_vals = _eval_grid(self.ps.f, t - tt["s"], xi_nodes)  # (S, Xi)
        return float(s_wts @ (g_vals * f_vals) @ xi_wts)

    def initial_term(self, t: float, x: float) -> float:
        p = self.ps.params
        width = max(min(t ** p.beta1, self.ps.domain.a) / 8.0,
                    1e-4 * self.ps.domain.a)
        xi_nodes, xi_wts = _source_mesh(self.ps.domain, x, width)
        prof = initial_kernel_profile(t, x, xi_nodes, self.ps.domain, p, self.ctl)
        tau_vals = _eval_array(self.ps.tau, xi_nodes)
        return float(np.sum(xi_wts * tau_vals * prof))

    def boundary_terms(self, t: float, x: float) -> float:
        ps = self.ps
        total = 0.0
        if ps.phi0 is not None:
            total += _boundary_term(ps.phi0, t, x, "left", ps.domain,
                                    ps.params, self.ctl, self.q)
        if ps.phi1 is not None:
            total -= _boundary_term(ps.phi1, t, x, "right", ps.domain,
                                    ps.params, self.ctl, self.q)
        return total

    def node_value(self, t: float, x: float) -> float:
        ps = self.ps
        at_wall = x == 0.0 or x == ps.domain.a
        value = 0.0
        if ps.tau is not None:
            value += self.initial_term(t, x)
        if ps.f is not None:
            value += self.forcing_term(t, x)
        if at_wall:
            # the boundary-kernel integral degenerates at the walls; its
            # limit is the prescribed wall value itself
            wall_fn = ps.phi0 if x == 0.0 else ps.phi1
            if wall_fn is not None:
                value += float(_eval_array(wall_fn, np.asarray(t)))
        else:
            value += self.boundary_terms(t, x)
        return value


def solve_y(ps: ProblemSpec, t: float, x: float,
            q: QuadratureSpec | None = None,
            ctl: SeriesControl | None = None) -> float:
    """Boundary-and-forcing part of the solution at one interior point."""
    q = q or DEFAULT_QUADRATURE
    ctl = ctl or DEFAULT_CONTROL
    engine = _GreensEngine(ps, q, ctl)
    value = engine.boundary_terms(t, x)
    if ps.f is not None:
        value += engine.forcing_term(t, x)
    return value


def solve_z(ps: ProblemSpec, t: float, x: float,
            ctl: SeriesControl | None = None) -> float:
    """Initial-data part of the solution at one point, t > 0."""
    ctl = ctl or DEFAULT_CONTROL
    if not t > 0:
        raise DomainError(f"need t > 0, got {t}")
    if ps.tau is None:
        return 0.0
    engine = _GreensEngine(ps, DEFAULT_QUADRATURE, ctl)
    return engine.initial_term(t, x)


def solve_u(ps: ProblemSpec, grid, q: QuadratureSpec | None = None,
            ctl: SeriesControl | None = None) -> SolutionField:
    """Full solution on a (t_nodes, x_nodes) tensor grid.

    Nodes must satisfy 0 < t <= T and 0 <= x <= a.  Any node failure
    aborts with the node coordinates attached.
    """
    q = q or DEFAULT_QUADRATURE
    ctl = ctl or DEFAULT_CONTROL
    t_nodes = np.asarray(grid[0], dtype=float)
    x_nodes = np.asarray(grid[1], dtype=float)
    if np.any(t_nodes <= 0) or np.any(t_nodes > ps.domain.T * (1 + 1e-12)):
        raise DomainError("t-nodes must lie in (0, T]")
    if np.any(x_nodes < 0) or np.any(x_nodes > ps.domain.a * (1 + 1e-12)):
        raise DomainError("x-nodes must lie in [0, a]")
    engine = _GreensEngine(ps, q, ctl)
    values = np.empty((len(t_nodes), len(x_nodes)))
    for j, x in enumerate(x_nodes):
        for i, t in enumerate(t_nodes):
            try:
                values[i, j] = engine.node_value(float(t), float(x))
            except Exception as exc:  # noqa: BLE001 - re-raised with coordinates
                raise NodeFailure(float(t), float(x), exc) from exc
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise NodeFailure(float(t_nodes[bad[0]]), float(x_nodes[bad[1]]),
                          ValueError("non-finite value"))
    meta = {"params": ps.params, "domain": ps.domain}
    return SolutionField(t_nodes=t_nodes, x_nodes=x_nodes, values=values,
                         method="greens", meta=meta)


def verify_solution(ps: ProblemSpec, fld: SolutionField,
                    q: QuadratureSpec | None = None,
                    ctl: SeriesControl | None = None) -> SolutionReport:
    """Boundary, initial and discrete-residual errors of a sampled field.

    The residual applies the oracle's convolution weights and central
    second difference; it needs an FD-aligned grid (uniform t-nodes
    starting at dt, uniform x-nodes including both walls) and is NaN
    otherwise.  The residual is scaled by max(1, max |f|).
    """
    from . import oracle

    ctl = ctl or DEFAULT_CONTROL
    t_nodes, x_nodes, vals = fld.t_nodes, fld.x_nodes, fld.values

    def data(fn, arg):
        return _eval_array(fn, arg) if fn is not None else np.zeros_like(arg)

    phi0_vals = data(ps.phi0, t_nodes)
    phi1_vals = data(ps.phi1, t_nodes)
    if x_nodes[0] == 0.0:
        left = np.abs(vals[:, 0] - phi0_vals)
    else:  # linear extrapolation from the two nearest columns
        w = x_nodes[1] / (x_nodes[1] - x_nodes[0])
        left = np.abs(w * vals[:, 0] + (1 - w) * vals[:, 1] - phi0_vals)
    if x_nodes[-1] == ps.domain.a:
        right = np.abs(vals[:, -1] - phi1_vals)
    else:
        w = (ps.domain.a - x_nodes[-2]) / (x_nodes[-1] - x_nodes[-2])
        right = np.abs((1 - w) * vals[:, -2] + w * vals[:, -1] - phi1_vals)
    boundary_error = float(max(left.max(), right.max()))

    initial_error = float(np.max(np.abs(vals[0] - data(ps.tau, x_nodes))))

    residual = math.nan
    grid = oracle.matching_grid(fld, ps.domain)
    if grid is not None:
        tau_row = data(ps.tau, x_nodes)
        res = oracle.fd_apply_operator(fld, grid, ps.params, ctl, initial=tau_row)
        f_vals = (_eval_grid(ps.f, t_nodes, x_nodes[1:-1])
                  if ps.f is not None else np.zeros_like(res))
        scale = max(1.0, float(np.max(np.abs(f_vals))))
        residual = float(np.max(np.abs(res - f_vals))) / scale
    return SolutionReport(boundary_error=boundary_error,
                          initial_error=initial_error, residual=residual)


# --------------------------------------------------------------------------
# separable reference solutions for eigenfunction data
# --------------------------------------------------------------------------

_EIGEN_CAP = 600


def eigen_relaxation(t: float, lam: float, p: FracParams,
                     ctl: SeriesControl | None = None) -> float:
    """Relaxation factor m(t) of one spatial eigenmode.

    For data proportional to an eigenfunction with -u'' = lam u the
    solution separates and m solves the scalar relaxation equation
    (regularized derivative of m) = -lam m, m(0) = 1.  The series
    sum_j (-lam)^j t**(beta j) E^{gamma j}_{alpha, beta j + 1}[delta
    t**alpha] is entire in lam t**beta, so this is an independent
    closed-form reference for separable problems.
    """
    ctl = ctl or DEFAULT_CONTROL
    if t == 0.0:
        return 1.0
    total = 0.0
    factor = 1.0
    small = 0
    w = p.delta * t ** p.alpha
    for j in range(_EIGEN_CAP):
        term = factor * prabhakar_ml(p.alpha, p.beta * j + 1.0, p.gamma * j, w, ctl)
        total += term
        if abs(term) < ctl.tol(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        factor *= -lam * t ** p.beta
    raise NonConvergence(f"eigenmode relaxation series stalled at t={t}, lam={lam}")


def eigen_forced_linear(t: float, lam: float, p: FracParams,
                        ctl: SeriesControl | None = None) -> float:
    """Response factor q(t) of one eigenmode under forcing f = t.

    Solves (regularized derivative of q) + lam q = t with q(0) = 0:
    ``q = sum_{j>=1} (-lam)**(j-1) t**(beta j + 1)
    E^{gamma j}_{alpha, beta j + 2}[delta t**alpha]``.
    """
    ctl = ctl or DEFAULT_CONTROL
    if t == 0.0:
        return 0.0
    total = 0.0
    factor = t
    small = 0
    w = p.delta * t ** p.alpha
    for j in range(1, _EIGEN_CAP):
        factor *= t ** p.beta
        term = factor * prabhakar_ml(p.alpha, p.beta * j + 2.0, p.gamma * j, w, ctl)
        total += term
        if abs(term) < ctl.tol(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        factor *= -lam
    raise NonConvergence(f"eigenmode response series stalled at t={t}, lam={lam}")


def max_rel_diff(a: SolutionField, b: SolutionField) -> float:
    """Field-relative difference: max |a - b| / max |a|.

    Pointwise relative error is meaningless where the field crosses
    zero (walls, early times), so differences are scaled by the
    reference field's own maximum magnitude.
    """
    if a.values.shape != b.values.shape:
        raise DomainError("fields must share a grid for comparison")
    scale = max(float(np.max(np.abs(a.values))), 1e-300)
    return float(np.max(np.abs(a.values - b.values))) / scale
