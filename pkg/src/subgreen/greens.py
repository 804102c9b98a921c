"""Method-of-images kernels for sub-diffusion on a finite strip.

Three kernel families enter the solution formula, and all of them are
image sums of one spatial power series whose coefficients are Prabhakar
functions of ``w = delta * s**alpha`` (``s`` the elapsed time):

* the interior kernel ``G`` weighting the forcing term,
* the initial-data kernel ``G~`` propagating the initial profile,
* the boundary flux kernel assembled from the half-line kernel ``omega``.

Each image at distance ``d`` contributes an alternating series in the
scaled distance ``z = d * s**(-beta1)``.  In float64 the series is only
meaningful up to a parameter-dependent crossover: beyond it the roundoff
noise of the partial sums exceeds the true value, which by then has
decayed super-exponentially (stretched-exponential in ``z``).  Images
past the crossover are therefore dropped and count as exactly zero; the
crossover sits where both magnitude estimates meet, giving the kernels
an absolute accuracy floor around 1e-7..1e-8 in the worst corners and
far better elsewhere.

Image sums are accumulated over distances in ascending order with exact
(fsum or cumulative) summation, so the pairwise cancellations that make
the kernels vanish at the walls hold exactly in floating point, not just
up to roundoff of a BLAS reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .errors import DomainError, NonConvergence
from .quadrule import composite_gauss, geometric_edges
from .specfun import (
    DEFAULT_CONTROL,
    E12Params,
    FracParams,
    SeriesControl,
    _poch_row,
    memory_kernel,
    recip_gamma,
)

__all__ = [
    "DomainSpec",
    "KernelValue",
    "e12_interior_params",
    "e12_initial_params",
    "e12_flux_params",
    "series_cutoff",
    "omega_kernel",
    "boundary_kernel_gxi",
    "green_g",
    "green_g_tilde",
    "free_space_v",
]


@dataclass(frozen=True)
class DomainSpec:
    """Rectangular space-time domain: 0 < x < a, 0 < t < T."""

    a: float
    T: float

    def __post_init__(self):
        if not (0 < self.a < math.inf and 0 < self.T < math.inf):
            raise DomainError(f"need finite positive (a, T), got ({self.a}, {self.T})")


@dataclass(frozen=True)
class KernelValue:
    """A kernel evaluation plus a bound on the discarded image tail."""

    value: float
    truncation_estimate: float


# --------------------------------------------------------------------------
# E12 parameter blocks of the three kernel families
# --------------------------------------------------------------------------

def e12_interior_params(p: FracParams) -> E12Params:
    """Parameters putting the interior kernel in bivariate-series form."""
    b1, g1 = p.beta1, p.gamma1
    return E12Params(a1=-g1, b1=1.0, d1=g1,
                     a2=-b1, b2=p.alpha, d2=b1,
                     a3=-g1, d3=g1, a4=1.0, d4=1.0, b3=1.0, d5=1.0)


def e12_initial_params(p: FracParams) -> E12Params:
    """Parameters putting the initial-data kernel in bivariate-series form."""
    b1, g1 = p.beta1, p.gamma1
    return E12Params(a1=-g1, b1=1.0, d1=-g1,
                     a2=-b1, b2=p.alpha, d2=1.0 - b1,
                     a3=-g1, d3=-g1, a4=1.0, d4=1.0, b3=1.0, d5=1.0)


def e12_flux_params(p: FracParams) -> E12Params:
    """Parameters putting the half-line flux kernel in bivariate-series form."""
    b1, g1 = p.beta1, p.gamma1
    return E12Params(a1=-g1, b1=1.0, d1=0.0,
                     a2=-b1, b2=p.alpha, d2=0.0,
                     a3=-g1, d3=0.0, a4=1.0, d4=1.0, b3=1.0, d5=1.0)


# --------------------------------------------------------------------------
# Coefficient tables and series machinery
# --------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _family_coeff(family: str, alpha: float, beta1: float, gamma1: float,
                  k_order: int, i_order: int) -> np.ndarray:
    """Coefficient matrix C[k, i] of one kernel family.

    The k-th spatial term carries the Prabhakar row
    ``sum_i C[k, i] * w**i`` with C absorbing the rising factorial, the
    reciprocal gamma and 1/i!.
    """
    i_idx = np.arange(i_order, dtype=float)
    inv_fact = np.exp(-sp.gammaln(i_idx + 1.0))
    C = np.empty((k_order + 1, i_order))
    for k in range(k_order + 1):
        if family == "interior":
            c, b = gamma1 * (1.0 - k), beta1 * (1.0 - k)
        elif family == "initial":
            c, b = -gamma1 * (1.0 + k), 1.0 - beta1 * (1.0 + k)
        elif family == "flux":
            c, b = -gamma1 * k, -beta1 * k
        else:
            raise ValueError(f"unknown kernel family {family!r}")
        C[k] = _poch_row(c, i_order) * recip_gamma(alpha * i_idx + b) * inv_fact
    C.setflags(write=False)
    return C


def _e_weights(C: np.ndarray, w) -> np.ndarray:
    """Prabhakar rows sum_i C[k, i] w**i; shape (..., K+1)."""
    i_order = C.shape[1]
    wp = np.power.outer(np.asarray(w, dtype=float), np.arange(i_order))
    return wp @ C.T


def _check_i_tail(C: np.ndarray, w_max: float, ctl: SeriesControl):
    if C.shape[1] < 3:
        raise NonConvergence("i_max too small for a tail check")
    tail = float(np.max(np.abs(C[:, -1]))) * abs(w_max) ** (C.shape[1] - 1)
    if tail > 1e-8:
        raise NonConvergence(
            f"kernel-scale series not converged at i_max={ctl.i_max} "
            f"(tail term {tail:.2e} at |w|={w_max:.3g}); raise i_max"
        )


def _pow_over_fact(z: np.ndarray, k_order: int) -> np.ndarray:
    """Rows of (-z)**k / k! for k = 0..k_order; z of any shape."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape + (k_order + 1,))
    out[..., 0] = 1.0
    for k in range(1, k_order + 1):
        out[..., k] = out[..., k - 1] * (-z) / k
    return out


@lru_cache(maxsize=64)
def series_cutoff(beta1: float, k_max: int) -> float:
    """Largest usable scaled distance for the image series in float64.

    Two ceilings apply: past the noise crossover the cancellation noise
    of the alternating series exceeds the true kernel (which is bounded
    by the stretched-exponential decay exp(-c z**(1/(1-beta1)))), and
    past the truncation ceiling the k_max-th term is no longer below
    1e-12.  Images beyond the smaller of the two are treated as zero.
    """
    if not 0 < beta1 < 0.5:
        raise DomainError(f"beta1 must lie in (0, 0.5), got {beta1}")
    c = (1.0 - beta1) * beta1 ** (beta1 / (1.0 - beta1))
    ks = np.arange(1, max(4 * k_max, 400), dtype=float)
    ln_eps = math.log(2.2e-16)
    ln_pi = math.log(math.pi)

    def gap(z):
        ln_noise = float(np.max(
            ks * math.log(z) + sp.gammaln(1.0 + beta1 * ks) - sp.gammaln(ks + 1.0)
        )) - ln_pi + ln_eps
        ln_true = -c * z ** (1.0 / (1.0 - beta1))
        return ln_noise - ln_true

    lo, hi = 2.0, 400.0
    if gap(lo) > 0:
        return lo
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            hi = mid
        else:
            lo = mid
    z_tail = math.exp(
        (math.log(1e-12) + float(sp.gammaln(k_max + 1.0))
         - float(sp.gammaln(1.0 + beta1 * k_max)) + ln_pi) / k_max
    )
    return min(lo, z_tail)


@lru_cache(maxsize=64)
def spatial_order(beta1: float, k_max: int) -> int:
    """Spatial series order actually needed below the cutoff.

    The k-th term at z = cutoff is bounded by z^k Gamma(1+beta1 k)/(pi k!);
    once that falls below 1e-13 the remaining columns are dead weight in
    the tensor-grid tables (relevant for small beta1, where the cutoff
    sits far below the k_max-feasibility ceiling).
    """
    cut = series_cutoff(beta1, k_max)
    ks = np.arange(8, k_max + 1)
    ln_term = (ks * math.log(cut) + sp.gammaln(1.0 + beta1 * ks)
               - sp.gammaln(ks + 1.0) - math.log(math.pi))
    small = np.nonzero(ln_term < math.log(1e-13))[0]
    if len(small):
        return int(ks[small[0]])
    return k_max


def _decay_bound(z: float, beta1: float) -> float:
    """Crude upper envelope of the image series magnitude for large z."""
    c = (1.0 - beta1) * beta1 ** (beta1 / (1.0 - beta1))
    return math.exp(max(-700.0, -c * max(z, 0.0) ** (1.0 / (1.0 - beta1))))


def _image_offsets(n_images: int) -> np.ndarray:
    return np.arange(-n_images, n_images + 1, dtype=float)


def _sorted_images(x: float, xi, a: float, n_images: int):
    """Signed image distances of the (x - xi) / (x + xi) families.

    Returns per-row distances sorted ascending (stable, minus-family
    first on ties) and the matching signs.  Adjacent opposite-sign
    entries that tie within a few ulp are true mirror pairs (wall
    symmetry); their distances are snapped equal so that ascending
    accumulation cancels them exactly.  ``xi`` may be scalar or vector.
    """
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    ns = _image_offsets(n_images)
    dist = np.concatenate([
        np.abs(x - xi_arr[:, None] + 2.0 * a * ns[None, :]),
        np.abs(x + xi_arr[:, None] + 2.0 * a * ns[None, :]),
    ], axis=1)
    signs = np.concatenate([np.ones_like(ns), -np.ones_like(ns)])
    signs = np.broadcast_to(signs, dist.shape).copy()
    order = np.argsort(dist, axis=1, kind="stable")
    dist = np.take_along_axis(dist, order, axis=1)
    signs = np.take_along_axis(signs, order, axis=1)
    tied = ((np.diff(dist, axis=1) <= 1e-13 * (1.0 + dist[:, :-1]))
            & (signs[:, :-1] * signs[:, 1:] < 0))
    if np.any(tied):
        rows, cols = np.nonzero(tied)
        mean = 0.5 * (dist[rows, cols] + dist[rows, cols + 1])
        dist[rows, cols] = mean
        dist[rows, cols + 1] = mean
    return dist, signs


def _bracket_value(s: float, x: float, xi: float, d: DomainSpec, p: FracParams,
                   ctl: SeriesControl, family: str) -> tuple[float, float]:
    """Image-sum bracket sum_n [F(|x-xi+2an| zeta) - F(|x+xi+2an| zeta)].

    Returns the bracket and the tail bound of the first dropped images.
    ``zeta = s**(-beta1)``; the family picks the coefficient table.
    Accumulation is exact (fsum) over distance-sorted terms.
    """
    C = _family_coeff(family, p.alpha, p.beta1, p.gamma1, ctl.k_max, ctl.i_max)
    w = p.delta * s ** p.alpha
    _check_i_tail(C, w, ctl)
    cut = series_cutoff(p.beta1, ctl.k_max)
    zeta = s ** (-p.beta1)
    dist, signs = _sorted_images(x, xi, d.a, ctl.n_images)
    dist, signs = dist[0], signs[0]
    z = dist * zeta
    n_keep = int(np.searchsorted(z, cut, side="right"))
    bracket = 0.0
    if n_keep:
        e_row = _e_weights(C, w)
        P = _pow_over_fact(z[:n_keep], ctl.k_max)
        vals = np.sum(P * e_row, axis=-1) * signs[:n_keep]
        bracket = math.fsum(vals.tolist())
    edge = 2.0 * d.a * (ctl.n_images + 1)
    tail = 2.0 * (_decay_bound((edge - x - xi) * zeta, p.beta1)
                  + _decay_bound((edge - abs(x - xi)) * zeta, p.beta1))
    return bracket, tail


# --------------------------------------------------------------------------
# Pointwise kernels
# --------------------------------------------------------------------------

def omega_kernel(t: float, x: float, p: FracParams,
                 ctl: SeriesControl | None = None) -> float:
    """Half-line flux kernel.

    ``omega(t, x) = t**-1 * sum_n ((-x)**n / n!) * t**(-beta1*n)
    E^{-gamma1 n}_{alpha, -beta1 n}[delta t**alpha]`` -- equal to 1/t
    times the bivariate series at the flux parameter block.  Vanishes
    identically at x = 0 and decays super-exponentially in
    ``x * t**(-beta1)``.
    """
    ctl = ctl or DEFAULT_CONTROL
    if t <= 0:
        raise DomainError(f"omega kernel needs t > 0, got {t}")
    if x < 0:
        raise DomainError(f"omega kernel needs x >= 0, got {x}")
    C = _family_coeff("flux", p.alpha, p.beta1, p.gamma1, ctl.k_max, ctl.i_max)
    w = p.delta * t ** p.alpha
    _check_i_tail(C, w, ctl)
    cut = series_cutoff(p.beta1, ctl.k_max)
    z = x * t ** (-p.beta1)
    if z > cut:
        return 0.0
    e_row = _e_weights(C, w)
    P = _pow_over_fact(np.asarray(z), ctl.k_max)
    return float(np.sum(P * e_row, axis=-1)) / t


def flux_series(z, w, p: FracParams, ctl: SeriesControl | None = None) -> np.ndarray:
    """Vectorized flux-kernel series t*omega at scaled distance z, scale w.

    ``z`` and ``w`` broadcast together; entries with z above the noise
    cutoff return 0.  Used by the boundary-term quadrature, where the
    kernel scale varies along the integration variable.
    """
    ctl = ctl or DEFAULT_CONTROL
    C = _family_coeff("flux", p.alpha, p.beta1, p.gamma1, ctl.k_max, ctl.i_max)
    z = np.asarray(z, dtype=float)
    w = np.broadcast_to(np.asarray(w, dtype=float), z.shape)
    _check_i_tail(C, float(np.max(np.abs(w), initial=0.0)), ctl)
    cut = series_cutoff(p.beta1, ctl.k_max)
    out = np.zeros(z.shape)
    keep = z <= cut
    if np.any(keep):
        e_rows = _e_weights(C, w[keep])
        P = _pow_over_fact(z[keep], ctl.k_max)
        out[keep] = np.sum(P * e_rows, axis=-1)
    return out


def boundary_kernel_gxi(t: float, x: float, eta: float, side: str,
                        d: DomainSpec, p: FracParams,
                        ctl: SeriesControl | None = None) -> KernelValue:
    """Boundary kernel: image sum of signed flux kernels.

    ``side='left'`` gives the kernel attached to the wall at 0 (image
    arguments x + 2na), ``side='right'`` the one at a (arguments
    x + (2n+1)a).
    """
    ctl = ctl or DEFAULT_CONTROL
    if not 0 <= eta < t:
        raise DomainError(f"need 0 <= eta < t, got eta={eta}, t={t}")
    if not 0 < x < d.a:
        raise DomainError(f"need 0 < x < a, got x={x}")
    s = t - eta
    ns = _image_offsets(ctl.n_images)
    if side == "left":
        args = x + 2.0 * d.a * ns
        next_d = x + 2.0 * d.a * (ctl.n_images + 1)
    elif side == "right":
        args = x + d.a * (2.0 * ns + 1.0)
        next_d = x + d.a * (2.0 * ctl.n_images + 3.0)
    else:
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    signs = np.sign(args)
    vals = flux_series(np.abs(args) * s ** (-p.beta1), p.delta * s ** p.alpha, p, ctl)
    value = math.fsum((signs * vals).tolist()) / s
    est = 2.0 * _decay_bound(next_d * s ** (-p.beta1), p.beta1) / s
    return KernelValue(value=value, truncation_estimate=est)


def green_g(t: float, x: float, eta: float, xi: float, d: DomainSpec,
            p: FracParams, ctl: SeriesControl | None = None) -> KernelValue:
    """Interior kernel of the solution formula.

    ``G(t, x, eta, xi) = (t-eta)**(beta1-1)/2`` times the image-sum
    difference of bivariate series at the interior parameter block.
    Symmetric in (x, xi), depends on time only through t - eta, and
    vanishes identically at x in {0, a} by image cancellation.
    """
    ctl = ctl or DEFAULT_CONTROL
    if not 0 <= eta < t:
        raise DomainError(f"need 0 <= eta < t, got eta={eta}, t={t}")
    if not (0 <= x <= d.a and 0 <= xi <= d.a):
        raise DomainError(f"need x, xi in [0, a], got ({x}, {xi})")
    s = t - eta
    bracket, tail = _bracket_value(s, x, xi, d, p, ctl, "interior")
    pref = 0.5 * s ** (p.beta1 - 1.0)
    return KernelValue(value=pref * bracket, truncation_estimate=pref * tail)


def free_space_v(t: float, x: float, eta: float, xi: float, p: FracParams,
                 ctl: SeriesControl | None = None) -> float:
    """Whole-line kernel: the single n = 0 direct-image term of green_g."""
    ctl = ctl or DEFAULT_CONTROL
    if not eta < t:
        raise DomainError(f"need eta < t, got eta={eta}, t={t}")
    s = t - eta
    C = _family_coeff("interior", p.alpha, p.beta1, p.gamma1, ctl.k_max, ctl.i_max)
    w = p.delta * s ** p.alpha
    _check_i_tail(C, w, ctl)
    cut = series_cutoff(p.beta1, ctl.k_max)
    z = abs(x - xi) * s ** (-p.beta1)
    if z > cut:
        return 0.0
    e_row = _e_weights(C, w)
    P = _pow_over_fact(np.asarray(z), ctl.k_max)
    return 0.5 * s ** (p.beta1 - 1.0) * float(np.sum(P * e_row, axis=-1))


def green_g_tilde(t: float, x: float, xi: float, d: DomainSpec, p: FracParams,
                  q=None, ctl: SeriesControl | None = None,
                  method: str = "series") -> KernelValue:
    """Initial-data kernel.

    The primary path is the closed-form series (prefactor
    ``t**(-beta1)/2``, initial parameter block).  ``method='quadrature'``
    instead integrates the memory kernel against green_g over the first
    time argument, and ``method='both'`` runs the two and raises
    :class:`PathMismatch` if they disagree beyond 1e-6 relative.

    The quadrature path converges slowly at xi == x for small beta
    (integrable endpoint singularity); the series path has no such
    restriction.
    """
    from .errors import PathMismatch

    ctl = ctl or DEFAULT_CONTROL
    if not 0 < t:
        raise DomainError(f"need t > 0, got {t}")
    if not (0 <= x <= d.a and 0 <= xi <= d.a):
        raise DomainError(f"need x, xi in [0, a], got ({x}, {xi})")
    value_s = est = None
    if method in ("series", "both"):
        bracket, tail = _bracket_value(t, x, xi, d, p, ctl, "initial")
        pref = 0.5 * t ** (-p.beta1)
        value_s, est = pref * bracket, pref * tail
    if method == "series":
        return KernelValue(value=value_s, truncation_estimate=est)
    value_q = _gtilde_quadrature(t, x, xi, d, p, q, ctl)
    if method == "quadrature":
        return KernelValue(value=value_q, truncation_estimate=0.0)
    scale = max(abs(value_s), abs(value_q), 1e-12)
    if abs(value_s - value_q) > 1e-6 * scale:
        raise PathMismatch(
            f"initial-data kernel paths disagree at (t={t}, x={x}, xi={xi}): "
            f"series {value_s!r} vs quadrature {value_q!r}"
        )
    return KernelValue(value=value_s, truncation_estimate=est)


# --------------------------------------------------------------------------
# Vectorized evaluation used by the solver and the quadrature path
# --------------------------------------------------------------------------

def floor_exponent(p: FracParams, k_max: int) -> float:
    """Smallest safe elapsed time for the folded time tables."""
    ln_gamma_top = float(sp.gammaln(1.0 + p.beta1 * k_max))
    L = min(6.5, (680.0 - ln_gamma_top) / k_max)
    return math.exp(-L / p.beta1)


def interior_kernel_at(s_nodes: np.ndarray, x: float, xi: float, d: DomainSpec,
                       p: FracParams, ctl: SeriesControl | None = None) -> np.ndarray:
    """green_g values at fixed (x, xi) over an array of elapsed times."""
    ctl = ctl or DEFAULT_CONTROL
    s_nodes = np.asarray(s_nodes, dtype=float)
    C = _family_coeff("interior", p.alpha, p.beta1, p.gamma1, ctl.k_max, ctl.i_max)
    w = p.delta * s_nodes ** p.alpha
    _check_i_tail(C, float(np.max(np.abs(w), initial=0.0)), ctl)
    cut = series_cutoff(p.beta1, ctl.k_max)
    zeta = s_nodes ** (-p.beta1)
    dist, signs = _sorted_images(x, xi, d.a, ctl.n_images)
    dist, signs = dist[0], signs[0]
    Z = dist[None, :] * zeta[:, None]            # (S, M)
    e_rows = _e_weights(C, w)                    # (S, K+1)
    out = np.zeros(len(s_nodes))
    keep = Z <= cut
    if np.any(keep):
        si, mi = np.nonzero(keep)
        P = _pow_over_fact(Z[keep], ctl.k_max)   # (n_keep, K+1)
        vals = np.sum(P * e_rows[si], axis=-1) * signs[mi]
        np.add.at(out, si, vals)
    return 0.5 * s_nodes ** (p.beta1 - 1.0) * out


def space_table(x: float, xi_nodes: np.ndarray, d: DomainSpec, p: FracParams,
                ctl: SeriesControl | None = None) -> dict:
    """Per-position image tables reusable across time nodes.

    For every source node the signed image contributions
    ``sign * (-d)**k / k!`` are sorted by distance and prefix-summed, so
    a time node only needs the prefix rank below its distance cutoff.
    Images beyond the largest possible cutoff (elapsed time T) are
    trimmed entirely; the prefix is cumulated before any BLAS contraction
    so wall cancellations stay exact.
    """
    ctl = ctl or DEFAULT_CONTROL
    xi_nodes = np.asarray(xi_nodes, dtype=float)
    k_ord = spatial_order(p.beta1, ctl.k_max)
    cut = series_cutoff(p.beta1, ctl.k_max)
    d_max = cut * d.T ** p.beta1
    if d_max > 600.0:
        raise NonConvergence(
            f"domain too wide for the power tables (d_max={d_max:.3g}); "
            "reduce T or the image window"
        )
    dist, signs = _sorted_images(x, xi_nodes, d.a, ctl.n_images)
    m_keep = max(int(np.max(np.sum(dist <= d_max, axis=1))), 1)
    dist, signs = dist[:, :m_keep], signs[:, :m_keep]
    P = np.zeros(dist.shape + (k_ord + 1,))
    useful = dist <= d_max
    if np.any(useful):
        P[useful] = _pow_over_fact(dist[useful], k_ord)
    P *= signs[:, :, None]
    prefix = np.concatenate(
        [np.zeros((dist.shape[0], 1, k_ord + 1)), np.cumsum(P, axis=1)], axis=1
    )
    return {"d_sorted": dist, "prefix": prefix, "k_order": k_ord}


def initial_kernel_profile(t: float, x: float, xi_nodes: np.ndarray,
                           d: DomainSpec, p: FracParams,
                           ctl: SeriesControl | None = None) -> np.ndarray:
    """green_g_tilde series values over an array of source positions.

    Supported down to roughly t ~ 1e-4 at default orders; below that the
    scaled coefficient rows overflow and NonConvergence is raised (use
    the pointwise kernel instead).
    """
    ctl = ctl or DEFAULT_CONTROL
    xi_nodes = np.asarray(xi_nodes, dtype=float)
    st = space_table(x, xi_nodes, d, p, ctl)
    k_ord = st["k_order"]
    C = _family_coeff("initial", p.alpha, p.beta1, p.gamma1, k_ord, ctl.i_max)
    w = p.delta * t ** p.alpha
    _check_i_tail(C, w, ctl)
    cut = series_cutoff(p.beta1, ctl.k_max)
    zeta = t ** (-p.beta1)
    e_row = _e_weights(C, w) * zeta ** np.arange(k_ord + 1)
    if not np.all(np.isfinite(e_row)):
        raise NonConvergence(
            f"initial-kernel profile overflowed at t={t}; evaluate pointwise"
        )
    ranks = np.sum(st["d_sorted"] <= cut * t ** p.beta1, axis=1)
    q_rows = st["prefix"] @ e_row                 # (Xi, M+1)
    vals = q_rows[np.arange(len(xi_nodes)), ranks]
    return 0.5 * t ** (-p.beta1) * vals


def interior_time_table(s_nodes: np.ndarray, p: FracParams,
                        ctl: SeriesControl | None = None) -> dict:
    """Per-time tables for the interior kernel: scaled Prabhakar rows.

    ``e[s, k] = s**(-beta1 k) E-row`` stays inside float64 because the
    solver floors its meshes at :func:`floor_exponent`.
    """
    ctl = ctl or DEFAULT_CONTROL
    s_nodes = np.asarray(s_nodes, dtype=float)
    k_ord = spatial_order(p.beta1, ctl.k_max)
    C = _family_coeff("interior", p.alpha, p.beta1, p.gamma1, k_ord, ctl.i_max)
    w = p.delta * s_nodes ** p.alpha
    _check_i_tail(C, float(np.max(np.abs(w), initial=0.0)), ctl)
    zeta_pow = np.power.outer(s_nodes ** (-p.beta1), np.arange(k_ord + 1))
    e = _e_weights(C, w) * zeta_pow
    if not np.all(np.isfinite(e)):
        raise NonConvergence(
            "interior time table overflowed; elapsed times below the "
            "floor_exponent limit"
        )
    cut = series_cutoff(p.beta1, ctl.k_max)
    return {
        "s": s_nodes,
        "e": e,
        "pref": 0.5 * s_nodes ** (p.beta1 - 1.0),
        "d_cut": cut * s_nodes ** p.beta1,
    }


def interior_grid_values(time_table: dict, space_tbl: dict) -> np.ndarray:
    """Interior kernel on the (time nodes) x (source nodes) tensor grid.

    One BLAS contraction of the image prefixes with the time rows, then
    a scalar gather at each node's image rank.  The prefixes are
    cumulated before the contraction, so wall cancellations survive
    whatever accumulation order the BLAS kernel uses.
    """
    d_sorted = space_tbl["d_sorted"]              # (Xi, M)
    prefix = space_tbl["prefix"]                  # (Xi, M+1, K+1)
    d_cut = time_table["d_cut"]                   # (S,)
    e = time_table["e"]                           # (S, K+1)
    n_xi = d_sorted.shape[0]
    q = np.tensordot(prefix, e, axes=([2], [1]))  # (Xi, M+1, S)
    ranks = np.sum(d_sorted[:, :, None] <= d_cut[None, None, :], axis=1)  # (Xi, S)
    picked = q[np.arange(n_xi)[:, None], ranks, np.arange(len(d_cut))[None, :]]
    return time_table["pref"][:, None] * picked.T  # (S, Xi)


def _gtilde_quadrature(t: float, x: float, xi: float, d: DomainSpec,
                       p: FracParams, q, ctl: SeriesControl) -> float:
    """Verification path: integrate the memory kernel against green_g.

    Split in the elapsed time s of the interior kernel: a deep log tail
    toward s = 0 (kernel boundary layer, integrable s**(beta1-1) mass at
    xi == x), a log bulk up to t/2, and a half graded in u = t - s
    toward u = 0 resolving the memory kernel's u**(-beta) endpoint.  The
    u-half evaluates the memory kernel at the exact offset nodes, never
    through a cancelling subtraction.
    """
    n_panels = getattr(q, "n_panels", 64) if q is not None else 64
    nodes = getattr(q, "nodes_per_panel", 8) if q is not None else 8
    cut = series_cutoff(p.beta1, ctl.k_max)
    d_min = float(_sorted_images(x, xi, d.a, ctl.n_images)[0][0, 0])
    if d_min > 0:
        # below s_deep every image is past the cutoff and the kernel is a
        # clean zero; the support above it spreads over ~log(t/s_deep)
        # e-folds, so panel count follows the e-fold span
        s_deep = min(max((d_min / cut) ** (1.0 / p.beta1) * 0.1, 1e-280),
                     t * 1e-3)
    else:
        s_deep = t * 1e-120
    n_left = max(n_panels // 2, int(1.5 * math.log(t / 2.0 / s_deep)))
    s_left, w_left = composite_gauss(geometric_edges(s_deep, t / 2.0, n_left),
                                     nodes)
    g_left = interior_kernel_at(s_left, x, xi, d, p, ctl)
    kern_left = memory_kernel(t - s_left, p, ctl)
    total = float(np.sum(w_left * kern_left * g_left))

    # memory-kernel half: the u**(-beta) tail keeps ~u**(1-beta) mass per
    # e-fold, so reach down until the remainder is ~1e-12 of the total
    u_deep = max((t / 2.0) * 1e-12 ** (1.0 / (1.0 - p.beta)), 1e-290)
    n_right = max(n_panels // 2, int(1.4 * math.log(t / 2.0 / u_deep)))
    u_nodes, w_right = composite_gauss(geometric_edges(u_deep, t / 2.0, n_right),
                                       nodes)
    g_right = interior_kernel_at(t - u_nodes, x, xi, d, p, ctl)
    kern_right = memory_kernel(u_nodes, p, ctl)
    total += float(np.sum(w_right * kern_right * g_right))
    return total
