"""Prabhakar fractional integral and derivatives of time functions.

The integral is a convolution with the weakly singular kernel
``(t-s)**(beta'-1) E^{gamma'}_{alpha, beta'}[delta (t-s)**alpha]``,
handled by composite Gauss rules on meshes clustered at the singular
endpoint.  The Riemann-Liouville-type derivative differentiates that
integral at order ``1 - beta``; the regularized (Caputo-type) derivative
applies the same integral to g'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, MissingDerivative, QuadratureFailure
from .quadrule import composite_gauss, geometric_edges, graded_edges
from .specfun import (
    DEFAULT_CONTROL,
    FracParams,
    SeriesControl,
    pochhammer,
    prabhakar_ml,
    recip_gamma,
)

__all__ = [
    "TimeFunction",
    "QuadratureSpec",
    "prabhakar_integral",
    "prabhakar_deriv_rl",
    "prabhakar_deriv_caputo",
    "derivative_relation_residual",
    "vanishing_integral_limit",
]


@dataclass(frozen=True)
class TimeFunction:
    """A function of time on [0, T], optionally with its derivative.

    ``eval`` should accept numpy arrays (any smooth numpy expression
    does); scalar-only callables are handled through a fallback loop.
    The Caputo-type derivative requires ``eval_deriv``.
    """

    eval: Callable
    eval_deriv: Callable | None = None

    def __call__(self, s):
        return _eval_array(self.eval, s)

    def deriv(self, s):
        if self.eval_deriv is None:
            raise MissingDerivative(
                "time function carries no derivative; supply eval_deriv "
                "or use the Riemann-Liouville route"
            )
        return _eval_array(self.eval_deriv, s)


def _eval_array(f, s):
    s = np.asarray(s, dtype=float)
    try:
        out = np.asarray(f(s), dtype=float)
        if out.shape == s.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(v)) for v in np.atleast_1d(s)]).reshape(s.shape)


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss description for weakly singular convolutions.

    With ``grading_exponent=None`` each operator builds a log-uniform
    mesh covering both integrand endpoints (see :meth:`singular_mesh`);
    an explicit exponent selects the classical power-graded mesh
    instead.
    """

    n_panels: int = 64
    grading_exponent: float | None = None
    nodes_per_panel: int = 8

    def __post_init__(self):
        if self.n_panels < 1 or self.nodes_per_panel < 1:
            raise DomainError("quadrature needs at least one panel and node")
        if self.grading_exponent is not None and self.grading_exponent < 1:
            raise DomainError("grading exponent must be >= 1")

    def singular_mesh(self, t: float, beta_prime: float, n_panels: int | None = None):
        """Panel edges on [0, t] for an integrand with a u**(beta'-1) end.

        An explicit grading exponent gives the classical power-graded
        mesh; otherwise a log-uniform mesh reaching down to where the
        remaining endpoint mass is ~1e-12 of the total, which keeps the
        per-panel variation of the power factor uniform across scales.
        """
        n = n_panels if n_panels is not None else self.n_panels
        if self.grading_exponent is not None:
            return graded_edges(t, n, self.grading_exponent)
        u_deep = t * max(1e-12 ** (1.0 / beta_prime), 1e-250)
        # the u**(beta'-1) factor changes by e**(1-beta') per e-fold, so
        # hold panels to about one e-fold each; the far end (data side)
        # gets a log refinement of its own since the data may carry
        # root-type behavior at time zero
        n_kernel = max(n, int(1.3 * math.log(2.0 * t / u_deep)) + 1)
        left = geometric_edges(u_deep, t / 2.0, n_kernel)
        n_data = max(n // 2, 42)
        right = t - geometric_edges(t * 1e-14, t / 2.0, n_data)[::-1]
        return np.concatenate([left[:-1], right])


DEFAULT_QUADRATURE = QuadratureSpec()


def _convolve_once(g: TimeFunction, t: float, order, q: QuadratureSpec,
                   ctl: SeriesControl, n_panels: int) -> float:
    alpha, beta_p, gamma_p, delta = order
    edges = q.singular_mesh(t, beta_p, n_panels)
    u, w = composite_gauss(edges, q.nodes_per_panel)
    kern = u ** (beta_p - 1.0) * prabhakar_ml(alpha, beta_p, gamma_p,
                                              delta * u ** alpha, ctl)
    return float(np.sum(w * kern * g(t - u)))


def prabhakar_integral(g: TimeFunction, t: float, order,
                       q: QuadratureSpec | None = None,
                       ctl: SeriesControl | None = None) -> float:
    """Prabhakar fractional integral of g at time t.

    ``order = (alpha, beta', gamma', delta)`` with alpha > 0 and
    beta' > 0 (integrable endpoint singularity).  The rule is validated
    by doubling the panel count; a shift beyond ten times the series
    tolerances raises :class:`QuadratureFailure`.
    """
    q = q or DEFAULT_QUADRATURE
    ctl = ctl or DEFAULT_CONTROL
    alpha, beta_p, _, _ = order
    if not (alpha > 0 and beta_p > 0):
        raise DomainError(f"need alpha > 0 and beta' > 0, got ({alpha}, {beta_p})")
    if not t > 0:
        raise DomainError(f"need t > 0, got {t}")
    coarse = _convolve_once(g, t, order, q, ctl, q.n_panels)
    fine = _convolve_once(g, t, order, q, ctl, 2 * q.n_panels)
    if abs(fine - coarse) > 10.0 * (ctl.rel_tol * abs(fine) + ctl.abs_tol):
        raise QuadratureFailure(
            f"panel doubling moved the integral from {coarse!r} to {fine!r} "
            f"at t={t}; integrand may be rougher than the mesh assumes"
        )
    return fine


def _power_moment(g: TimeFunction, t: float, nu: float, q: QuadratureSpec,
                  ctl: SeriesControl) -> float:
    """integral of (t-s)**nu g(s) ds over [0, t] for nu > -1."""
    edges = q.singular_mesh(t, nu + 1.0)
    u, w = composite_gauss(edges, q.nodes_per_panel)
    return float(np.sum(w * u ** nu * g(t - u)))


def prabhakar_deriv_rl(g: TimeFunction, t: float, p: FracParams,
                       q: QuadratureSpec | None = None,
                       ctl: SeriesControl | None = None,
                       cross_check: bool = False) -> float:
    """Riemann-Liouville-type Prabhakar derivative (no g' needed).

    The kernel series of the order-(alpha, 1-beta, -gamma, delta)
    integral is differentiated termwise.  Terms whose power moment keeps
    a non-positive exponent (k <= beta/alpha) are differentiated
    centrally with step 1e-4 t; all higher terms shift their gamma
    argument in closed form and are integrated as one regular kernel.

    With ``cross_check=True`` the result is compared against a central
    difference of the full integral; disagreement raises
    :class:`QuadratureFailure`.
    """
    q = q or DEFAULT_QUADRATURE
    ctl = ctl or DEFAULT_CONTROL
    if not t > 0:
        raise DomainError(f"need t > 0, got {t}")
    alpha, beta, gamma, delta = p.alpha, p.beta, p.gamma, p.delta
    k_sing = int(math.floor(beta / alpha + 1e-12))
    h = 1e-4 * t

    total = 0.0
    for k in range(k_sing + 1):
        c_k = (pochhammer(-gamma, k) * delta ** k
               * recip_gamma(alpha * k + 1.0 - beta) / math.factorial(k))
        if c_k == 0.0:
            continue
        nu = alpha * k - beta
        j_plus = _power_moment(g, t + h, nu, q, ctl)
        j_minus = _power_moment(g, t - h, nu, q, ctl)
        total += c_k * (j_plus - j_minus) / (2.0 * h)

    total += _regular_tail_integral(g, t, p, k_sing, q, ctl)

    if cross_check:
        order = (alpha, 1.0 - beta, -gamma, delta)
        fd = (_convolve_once(g, t + h, order, q, ctl, q.n_panels)
              - _convolve_once(g, t - h, order, q, ctl, q.n_panels)) / (2.0 * h)
        if abs(fd - total) > 1e-6 * max(1.0, abs(total)):
            raise QuadratureFailure(
                f"termwise derivative {total!r} disagrees with the "
                f"finite-difference value {fd!r} at t={t}"
            )
    return total


def _regular_tail_integral(g: TimeFunction, t: float, p: FracParams,
                           k_sing: int, q: QuadratureSpec,
                           ctl: SeriesControl) -> float:
    """integral of the termwise-differentiated kernel tail against g.

    Tail kernel: sum over k > k_sing of
    ``(-gamma)_k delta^k u**(alpha k - beta - 1) / (k! Gamma(alpha k - beta))``,
    whose leading exponent exceeds -1.
    """
    alpha, beta, gamma, delta = p.alpha, p.beta, p.gamma, p.delta
    k0 = k_sing + 1
    beta_eff = alpha * k0 - beta
    edges = q.singular_mesh(t, beta_eff)
    u, w = composite_gauss(edges, q.nodes_per_panel)

    # factor out the leading power so the stop rule sees a scale-free
    # series in v = u**alpha (the raw kernel norm is dominated by the
    # innermost singular nodes and would truncate the sum immediately)
    v = u ** alpha
    vp = np.ones_like(u)
    v_t = t ** alpha
    vp_t = 1.0
    bracket = np.zeros_like(u)
    partial_t = 0.0
    coeff = pochhammer(-gamma, k0) * delta ** k0 / math.factorial(k0)
    small = 0
    for k in range(k0, k0 + ctl.k_max + 1):
        c_k = coeff * recip_gamma(alpha * k - beta)
        bracket += c_k * vp
        partial_t += c_k * vp_t
        if abs(c_k * vp_t) < ctl.tol(abs(partial_t)):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        vp = vp * v
        vp_t *= v_t
        coeff *= (-gamma + k) * delta / (k + 1.0)
    kern = u ** (alpha * k0 - beta - 1.0) * bracket
    return float(np.sum(w * kern * g(t - u)))


def prabhakar_deriv_caputo(g: TimeFunction, t: float, p: FracParams,
                           q: QuadratureSpec | None = None,
                           ctl: SeriesControl | None = None) -> float:
    """Regularized (Caputo-type) Prabhakar derivative: the integral of g'.

    Raises :class:`MissingDerivative` when g carries no derivative; in
    that case use the Riemann-Liouville route on g - g(0) instead.
    """
    q = q or DEFAULT_QUADRATURE
    ctl = ctl or DEFAULT_CONTROL
    if g.eval_deriv is None:
        raise MissingDerivative(
            "Caputo-type derivative needs eval_deriv on the time function"
        )
    gprime = TimeFunction(eval=g.eval_deriv)
    return prabhakar_integral(gprime, t, (p.alpha, 1.0 - p.beta, -p.gamma, p.delta),
                              q, ctl)


def derivative_relation_residual(g: TimeFunction, t: float, p: FracParams,
                                 q: QuadratureSpec | None = None,
                                 ctl: SeriesControl | None = None) -> float:
    """|Caputo-type derivative - RL-type derivative of (g - g(0))|.

    The two sides follow independent evaluation paths (integral of g'
    versus termwise-differentiated integral of g), so a small residual
    certifies both.  Contract: <= 1e-6 for smooth g.
    """
    g0 = float(g(np.asarray(0.0)))
    shifted = TimeFunction(eval=lambda s: g(s) - g0)
    cap = prabhakar_deriv_caputo(g, t, p, q, ctl)
    rl = prabhakar_deriv_rl(shifted, t, p, q, ctl)
    return abs(cap - rl)


def vanishing_integral_limit(g: TimeFunction, p: FracParams,
                             ctl: SeriesControl | None = None,
                             q: QuadratureSpec | None = None) -> float:
    """Fitted decay exponent of the order-(1-beta) integral as t -> 0.

    Samples the integral at t = 1e-1 .. 1e-4 and fits the log-log slope;
    for bounded g the values vanish like t**(1-beta), so the slope should
    be 1 - beta within 0.05.  Returns NaN if all samples are zero.
    """
    ctl = ctl or DEFAULT_CONTROL
    q = q or DEFAULT_QUADRATURE
    ts = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    order = (p.alpha, 1.0 - p.beta, -p.gamma, p.delta)
    vals = np.array([prabhakar_integral(g, t, order, q, ctl) for t in ts])
    if np.all(np.abs(vals) < 1e-300):
        return math.nan
    slope, _ = np.polyfit(np.log(ts), np.log(np.abs(vals)), 1)
    return float(slope)
