"""Special functions for Prabhakar-kernel sub-diffusion.

Everything here is a truncated power series with gamma-function weights.
Two conventions keep the series well defined at gamma poles:

* denominator gammas are always evaluated through :func:`recip_gamma`,
  which returns exactly 0 at non-positive integers, so pole terms drop
  out of a sum instead of producing inf/nan;
* wherever a quotient Gamma(A + m) / Gamma(A) appears, it is computed as
  the rising factorial ``pochhammer(A, m)``, which stays finite even when
  both gammas sit on poles.

All series share one stop rule: truncation is accepted once three
consecutive terms fall below ``abs_tol + rel_tol * |partial sum|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import DivergentParameters, DomainError, NonConvergence, UnfoldablePole

__all__ = [
    "FracParams",
    "SeriesControl",
    "E12Params",
    "recip_gamma",
    "pochhammer",
    "prabhakar_ml",
    "wright_e",
    "bivariate_e12",
    "kernel_antiderivative",
    "memory_kernel",
]

_STOP_RUN = 3  # consecutive small terms required before truncating


@dataclass(frozen=True)
class FracParams:
    """The four parameters of the regularized Prabhakar derivative.

    ``alpha`` is the order of the inner power in the kernel's
    Mittag-Leffler argument, ``beta`` the derivative order, ``gamma`` the
    Prabhakar exponent and ``delta`` the kernel scale.  The halves
    ``beta1 = beta/2`` and ``gamma1 = gamma/2`` appear throughout the
    Green's-function kernels.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.beta < 1:
            # beta == 1 is rejected: the integer-part bracket in the
            # derivative definition is ambiguous there and every kernel
            # below assumes one integration order.
            raise DomainError(
                f"beta must lie in the open interval (0, 1), got {self.beta}"
            )

    @property
    def beta1(self) -> float:
        return self.beta / 2.0

    @property
    def gamma1(self) -> float:
        return self.gamma / 2.0


@dataclass(frozen=True)
class SeriesControl:
    """Truncation orders and tolerances for image sums and power series.

    ``k_max`` caps spatial-power series, ``i_max`` caps the series in the
    kernel-scale variable, ``n_images`` is the half-width of method-of-
    images sums.  The default k_max keeps the spatial tail below 1e-12
    over the whole noise-feasible argument range even as beta approaches
    1 (beta1 -> 1/2), where the series needs the most terms.
    """

    k_max: int = 120
    i_max: int = 60
    n_images: int = 8
    abs_tol: float = 1e-14
    rel_tol: float = 1e-12

    def __post_init__(self):
        if min(self.k_max, self.i_max, self.n_images) < 1:
            raise DomainError("series orders and image width must be >= 1")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be positive")

    def tol(self, partial: float) -> float:
        return self.abs_tol + self.rel_tol * abs(partial)


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class E12Params:
    """Parameter block of the bivariate double series.

    The term with indices (n, m) reads::

        Gamma(a1*n + b1*m + d1) * x**n * y**m
        -----------------------------------------------------------------
        Gamma(a2*n + b2*m + d2) Gamma(a3*n + d3) Gamma(a4*n + d4)
                                                 Gamma(b3*m + d5) n! ... ,

    with the n!/m! factors absorbed into the a4/b3 slots by the callers
    that need them.  Convergence for all real (x, y) requires
    ``delta1 = a2 + a3 + a4 - a1 > 0`` and ``delta2 = b2 + b3 - b1 > 0``.
    """

    a1: float
    b1: float
    d1: float
    a2: float
    b2: float
    d2: float
    a3: float
    d3: float
    a4: float
    d4: float
    b3: float
    d5: float

    @property
    def delta1(self) -> float:
        return self.a2 + self.a3 + self.a4 - self.a1

    @property
    def delta2(self) -> float:
        return self.b2 + self.b3 - self.b1

    @property
    def foldable(self) -> bool:
        """Whether the numerator gamma cancels against the a3/d3 slot.

        With ``a1 == a3``, ``d1 == d3`` and ``b1 == 1`` the quotient
        Gamma(d3 + a3*n + m) / Gamma(d3 + a3*n) folds into a rising
        factorial, which is the pattern of every kernel in this package.
        """
        return self.a1 == self.a3 and self.d1 == self.d3 and self.b1 == 1.0


def recip_gamma(x):
    """Reciprocal gamma function 1/Gamma(x), exactly 0 at the poles.

    Total on the reals: non-positive integers map to 0.0 rather than
    raising or returning inf, so series terms that hit a denominator pole
    vanish cleanly.  Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    out = sp.rgamma(x)
    pole = (x <= 0) & (x == np.floor(x))
    if pole.any():
        out = np.where(pole, 0.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def pochhammer(c: float, k: int) -> float:
    """Rising factorial (c)_k = c (c+1) ... (c+k-1), empty product = 1.

    Computed as a plain product so it is exact when any factor is zero.
    """
    if k < 0:
        raise DomainError(f"pochhammer order must be >= 0, got {k}")
    out = 1.0
    for j in range(k):
        out *= c + j
        if out == 0.0:
            return 0.0
    return out


def _poch_row(c: float, n: int) -> np.ndarray:
    """Array [(c)_0, (c)_1, ..., (c)_{n-1}] via a cumulative product."""
    if n <= 0:
        return np.empty(0)
    factors = np.concatenate(([1.0], c + np.arange(n - 1, dtype=float)))
    return np.cumprod(factors)


class _StopRule:
    """Counts consecutive small terms; fires after _STOP_RUN of them."""

    def __init__(self, ctl: SeriesControl):
        self.ctl = ctl
        self.small = 0

    def done(self, term_mag: float, partial_mag: float) -> bool:
        if term_mag < self.ctl.tol(partial_mag):
            self.small += 1
        else:
            self.small = 0
        return self.small >= _STOP_RUN


def prabhakar_ml(alpha: float, beta: float, gamma: float, z, ctl: SeriesControl | None = None):
    """Three-parameter (Prabhakar) Mittag-Leffler function.

    Evaluates ``sum_k (gamma)_k z^k / (Gamma(alpha k + beta) k!)`` with
    the module stop rule.  ``z`` may be a scalar or an ndarray; the stop
    rule then acts on the largest term over the array.

    Raises
    ------
    NonConvergence
        If ``ctl.k_max`` terms were summed without the stop rule firing.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    ctl = ctl or DEFAULT_CONTROL
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    zp = np.ones_like(z_arr)  # z^k
    coeff = 1.0  # (gamma)_k / k!
    total = np.zeros_like(z_arr)
    rule = _StopRule(ctl)
    for k in range(ctl.k_max + 1):
        term = coeff * recip_gamma(alpha * k + beta) * zp
        total = total + term
        if rule.done(float(np.max(np.abs(term))), float(np.max(np.abs(total)))):
            return float(total) if scalar else total
        zp = zp * z_arr
        coeff *= (gamma + k) / (k + 1.0)
    raise NonConvergence(
        f"Prabhakar series (alpha={alpha}, beta={beta}, gamma={gamma}) "
        f"did not settle within k_max={ctl.k_max} terms at |z|max="
        f"{float(np.max(np.abs(z_arr))):.3g}"
    )


def wright_e(alpha: float, beta: float, mu: float, delta: float, z,
             ctl: SeriesControl | None = None):
    """Wright-type series with one ascending and one descending gamma.

    Evaluates ``sum_n z^n / (Gamma(alpha n + mu) Gamma(delta - beta n))``.
    Terms whose gammas sit on poles vanish via :func:`recip_gamma`.
    Scalar or array ``z``.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    ctl = ctl or DEFAULT_CONTROL
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    zp = np.ones_like(z_arr)
    total = np.zeros_like(z_arr)
    rule = _StopRule(ctl)
    for n in range(ctl.k_max + 1):
        term = recip_gamma(alpha * n + mu) * recip_gamma(delta - beta * n) * zp
        total = total + term
        if rule.done(float(np.max(np.abs(term))), float(np.max(np.abs(total)))):
            return float(total) if scalar else total
        zp = zp * z_arr
    raise NonConvergence(
        f"Wright-type series (alpha={alpha}, beta={beta}, mu={mu}, delta={delta}) "
        f"did not settle within k_max={ctl.k_max} terms at |z|max="
        f"{float(np.max(np.abs(z_arr))):.3g}"
    )


def _e12_numerator_pole(arg: float) -> bool:
    return arg < 0.5 and abs(arg - round(arg)) < 1e-9


def bivariate_e12(p: E12Params, x: float, y: float,
                  ctl: SeriesControl | None = None) -> float:
    """Bivariate Mittag-Leffler-type double series.

    For foldable parameters (see :attr:`E12Params.foldable`) each term
    uses ``pochhammer(d3 + a3*n, m)`` for the numerator-over-a3 quotient,
    which is finite even when both gammas sit at poles.  Otherwise the
    general double sum is used and a numerator pole that is not cancelled
    raises :class:`UnfoldablePole`.

    Raises
    ------
    DivergentParameters
        If ``delta1 <= 0`` or ``delta2 <= 0``.
    UnfoldablePole
        Non-foldable parameters with a numerator gamma pole.
    NonConvergence
        Row or column caps reached before the stop rule fired.
    """
    ctl = ctl or DEFAULT_CONTROL
    if not (p.delta1 > 0 and p.delta2 > 0):
        raise DivergentParameters(
            f"series diverges: delta1={p.delta1:.6g}, delta2={p.delta2:.6g} "
            "(both must be positive)"
        )
    foldable = p.foldable
    total = 0.0
    outer = _StopRule(ctl)
    xp = 1.0
    for n in range(ctl.k_max + 1):
        if foldable:
            base = p.d3 + p.a3 * n
            row_coeff = xp * recip_gamma(p.a4 * n + p.d4)
        else:
            row_coeff = xp * recip_gamma(p.a3 * n + p.d3) * recip_gamma(p.a4 * n + p.d4)
        row = 0.0
        inner = _StopRule(ctl)
        yp = 1.0
        poch = 1.0
        for m in range(ctl.i_max + 1):
            if foldable:
                num = poch
            else:
                arg = p.a1 * n + p.b1 * m + p.d1
                if _e12_numerator_pole(arg):
                    raise UnfoldablePole(
                        f"numerator gamma pole at (n={n}, m={m}), argument {arg:.6g}; "
                        "parameters do not match the foldable pattern"
                    )
                num = math.gamma(arg)
            term = (num * yp
                    * recip_gamma(p.a2 * n + p.b2 * m + p.d2)
                    * recip_gamma(p.b3 * m + p.d5))
            row += term
            if inner.done(abs(term) * abs(row_coeff), abs(total) + abs(row * row_coeff)):
                break
            yp *= y
            if foldable:
                poch *= base + m
        else:
            raise NonConvergence(
                f"inner series did not settle within i_max={ctl.i_max} terms "
                f"(n={n}, y={y:.3g})"
            )
        total += row * row_coeff
        if outer.done(abs(row * row_coeff), abs(total)):
            return total
        xp *= x
    raise NonConvergence(
        f"outer series did not settle within k_max={ctl.k_max} terms (x={x:.3g})"
    )


def kernel_antiderivative(t, p: FracParams, ctl: SeriesControl | None = None):
    """Primitive of the regularized-derivative memory kernel.

    ``W(t) = t^(1-beta) * E^{-gamma}_{alpha, 2-beta}[delta t^alpha]`` is
    the exact integral of :func:`memory_kernel` from 0 to ``t``; it
    vanishes at ``t = 0`` since ``beta < 1``.  Scalar or array ``t``.
    """
    ctl = ctl or DEFAULT_CONTROL
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("kernel antiderivative needs t >= 0")
    ml = prabhakar_ml(p.alpha, 2.0 - p.beta, -p.gamma, p.delta * t_arr ** p.alpha, ctl)
    out = t_arr ** (1.0 - p.beta) * ml
    if out.ndim == 0:
        return float(out)
    return out


def memory_kernel(t, p: FracParams, ctl: SeriesControl | None = None):
    """Convolution kernel of the regularized Prabhakar derivative.

    ``k(t) = t^(-beta) * E^{-gamma}_{alpha, 1-beta}[delta t^alpha]``,
    integrable at 0.  Scalar or array ``t > 0``.
    """
    ctl = ctl or DEFAULT_CONTROL
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("memory kernel needs t > 0")
    ml = prabhakar_ml(p.alpha, 1.0 - p.beta, -p.gamma, p.delta * t_arr ** p.alpha, ctl)
    out = t_arr ** (-p.beta) * ml
    if out.ndim == 0:
        return float(out)
    return out
