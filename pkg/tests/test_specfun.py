import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import subgreen as sg
from subgreen.errors import (
    DivergentParameters,
    DomainError,
    NonConvergence,
    UnfoldablePole,
)
from subgreen.greens import e12_flux_params, e12_initial_params, e12_interior_params

from oracles import bivariate_e12_mp, e12_single_series_mp, prabhakar_mp, wright_mp

# frozen extended-precision references (tests/oracles.py, 50 digits)
PRABHAKAR_089_03_05 = 1.1458118042441620822   # prabhakar_mp(0.8, 0.9, 0.3, 0.5)
W1_REFERENCE = 0.98628210728151694888         # prabhakar_mp(0.8, 1.5, -0.3, 0.5)
E12_FLUX_M07_02 = 0.094992574724035935096     # bivariate_e12_mp(flux, -0.7, 0.2)
E12_INTERIOR_M09_Y0 = 0.22196203313841763143  # e12_single_series_mp(interior, -0.9)


class TestRecipGamma:
    def test_positive_values(self):
        assert sg.recip_gamma(1.0) == 1.0
        assert sg.recip_gamma(0.5) == pytest.approx(1.0 / math.sqrt(math.pi),
                                                    rel=1e-15)

    def test_poles_are_exact_zeros(self):
        for x in (0.0, -1.0, -3.0, -20.0):
            assert sg.recip_gamma(x) == 0.0

    def test_array_input(self):
        out = sg.recip_gamma(np.array([1.0, -3.0, 0.5]))
        assert out[1] == 0.0 and out[0] == 1.0

    @given(st.floats(-5.0, 5.0))
    @settings(max_examples=200, deadline=None)
    def test_recurrence(self, x):
        # 1/Gamma(x+1) == (1/Gamma(x)) / x away from the poles
        if abs(x - round(x)) < 1e-3 or abs(x) < 1e-3:
            return
        assert sg.recip_gamma(x + 1.0) == pytest.approx(
            sg.recip_gamma(x) / x, abs=1e-12, rel=1e-12)


class TestPochhammer:
    def test_empty_product(self):
        assert sg.pochhammer(0.3, 0) == 1.0

    def test_factorial(self):
        assert sg.pochhammer(1.0, 5) == 120.0

    def test_zero_factor_is_exact(self):
        assert sg.pochhammer(-2.0, 4) == 0.0

    def test_direct_product(self):
        assert sg.pochhammer(-0.15, 2) == pytest.approx(-0.1275, rel=1e-15)

    def test_negative_order_rejected(self):
        with pytest.raises(DomainError):
            sg.pochhammer(1.0, -1)

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.integers(0, 12))
    @settings(max_examples=100, deadline=None)
    def test_vandermonde_convolution(self, d, g, k):
        lhs = sum(sg.pochhammer(d, m) * sg.pochhammer(g, k - m)
                  / (math.factorial(m) * math.factorial(k - m))
                  for m in range(k + 1))
        rhs = sg.pochhammer(d + g, k) / math.factorial(k)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


class TestPrabhakarMl:
    def test_zero_weight_reduces_to_recip_gamma(self):
        assert sg.prabhakar_ml(0.8, 0.9, 0.0, 7.3) == pytest.approx(
            sg.recip_gamma(0.9), rel=1e-15)

    def test_exponential_special_case(self):
        assert sg.prabhakar_ml(1.0, 1.0, 1.0, 1.0) == pytest.approx(
            math.e, rel=1e-14)

    def test_frozen_reference(self):
        assert sg.prabhakar_ml(0.8, 0.9, 0.3, 0.5) == pytest.approx(
            PRABHAKAR_089_03_05, rel=1e-13)

    def test_live_oracle_samples(self):
        for (a, b, g, z) in [(0.6, 1.2, -0.4, 0.9), (1.3, 0.2, 2.0, -1.5)]:
            assert sg.prabhakar_ml(a, b, g, z) == pytest.approx(
                float(prabhakar_mp(a, b, g, z)), rel=1e-12, abs=1e-14)

    def test_array_argument(self):
        zs = np.linspace(-5, 5, 11)
        out = sg.prabhakar_ml(1.0, 1.0, 1.0, zs)
        assert np.allclose(out, np.exp(zs), rtol=1e-12)

    def test_requires_positive_alpha(self):
        with pytest.raises(DomainError):
            sg.prabhakar_ml(0.0, 1.0, 1.0, 0.5)

    def test_cap_raises(self):
        with pytest.raises(NonConvergence):
            sg.prabhakar_ml(0.1, 1.0, 1.0, 50.0, sg.SeriesControl(k_max=5))


class TestWright:
    def test_only_first_term_at_zero(self):
        assert sg.wright_e(1.0, 0.25, 2.0, 1.0, 0.0) == pytest.approx(
            sg.recip_gamma(2.0) * sg.recip_gamma(1.0), rel=1e-15)

    def test_no_descent_reduces_to_mittag_leffler(self):
        assert sg.wright_e(1.0, 0.0, 1.0, 1.0, 1.0) == pytest.approx(
            math.e, rel=1e-13)
        for z in (-2.0, 0.5, 3.0):
            assert sg.wright_e(0.8, 0.0, 1.3, 0.6, z) == pytest.approx(
                sg.prabhakar_ml(0.8, 1.3, 1.0, z) * sg.recip_gamma(0.6),
                rel=1e-12, abs=1e-14)

    def test_matches_oracle_in_float_range(self):
        for z in (-4.0, -1.0, 2.0):
            assert sg.wright_e(1.0, 0.25, 2.0, 0.75, z) == pytest.approx(
                float(wright_mp(1.0, 0.25, 2.0, 0.75, z, dps=60)),
                rel=1e-11, abs=1e-13)

    def test_large_argument_limit_via_oracle(self):
        # z * e(z) -> -1 / (Gamma(mu - alpha) Gamma(delta + beta)) as
        # z -> -inf; float64 cannot sum the series that deep, so the
        # asymptote is verified with the extended-precision oracle and a
        # Richardson step in 1/z
        import mpmath as mp

        for (al, b1, mu, dl, zs) in [(1.0, 0.25, 2.0, 0.75, (25.0, 50.0)),
                                     (0.8, 0.3, 2.0, 1.0, (15.0, 30.0))]:
            target = float(-1.0 / (mp.gamma(mu - al) * mp.gamma(dl + b1)))
            vals = [float(-z * wright_mp(al, b1, mu, dl, -z)) for z in zs]
            extrap = 2.0 * vals[1] - vals[0]
            assert extrap == pytest.approx(target, rel=2e-2)

    def test_squared_argument_variant_vanishes(self):
        # with mu = alpha the limit constant carries a gamma pole and the
        # scaled values fall to zero
        vals = [abs(float(z * z * wright_mp(1.0, 0.25, 1.0, 0.75, -z)))
                for z in (15.0, 30.0)]
        assert vals[1] < vals[0] and vals[1] < 1e-12


class TestBivariateE12:
    def setup_method(self):
        self.p = sg.FracParams(alpha=0.8, beta=0.5, gamma=0.3, delta=0.5)

    def test_origin_value(self):
        par = e12_interior_params(self.p)
        expected = (math.gamma(par.d1) * sg.recip_gamma(par.d2)
                    * sg.recip_gamma(par.d3) * sg.recip_gamma(par.d4)
                    * sg.recip_gamma(par.d5))
        assert sg.bivariate_e12(par, 0.0, 0.0) == pytest.approx(
            expected, rel=1e-14)

    def test_flux_instantiation_against_double_sum(self):
        par = e12_flux_params(self.p)
        assert sg.bivariate_e12(par, -0.7, 0.2) == pytest.approx(
            E12_FLUX_M07_02, rel=1e-12)

    def test_other_instantiations_against_live_oracle(self):
        for par, x, y in [(e12_interior_params(self.p), -0.9, 0.3),
                          (e12_initial_params(self.p), -1.3, 0.25)]:
            assert sg.bivariate_e12(par, x, y) == pytest.approx(
                float(bivariate_e12_mp(par, x, y)), rel=1e-12)

    def test_single_series_collapse_at_y_zero(self):
        par = e12_interior_params(self.p)
        assert sg.bivariate_e12(par, -0.9, 0.0) == pytest.approx(
            E12_INTERIOR_M09_Y0, rel=1e-12)
        par = e12_initial_params(self.p)
        assert sg.bivariate_e12(par, -1.3, 0.0) == pytest.approx(
            float(e12_single_series_mp(par, -1.3)), rel=1e-12)

    def test_divergent_parameters_rejected(self):
        par = sg.E12Params(a1=2.0, b1=1.0, d1=1.0, a2=0.5, b2=1.0, d2=1.0,
                           a3=0.5, d3=1.0, a4=0.5, d4=1.0, b3=1.0, d5=1.0)
        assert par.delta1 < 0
        with pytest.raises(DivergentParameters):
            sg.bivariate_e12(par, 0.5, 0.5)

    def test_unfoldable_pole_rejected(self):
        # numerator gamma hits -1 at (n=1, m=0) and the a3 slot cannot fold it
        par = sg.E12Params(a1=-1.0, b1=1.0, d1=0.0, a2=1.0, b2=1.0, d2=1.0,
                           a3=0.7, d3=1.0, a4=1.0, d4=1.0, b3=1.0, d5=1.0)
        assert not par.foldable
        with pytest.raises(UnfoldablePole):
            sg.bivariate_e12(par, 0.9, 0.1)

    def test_general_path_agrees_with_foldable_on_pole_free_params(self):
        par_g = sg.E12Params(a1=0.4, b1=1.0, d1=1.2, a2=0.3, b2=0.8, d2=0.9,
                             a3=0.4, d3=1.2, a4=1.0, d4=1.0, b3=1.0, d5=1.0)
        assert par_g.foldable
        par_u = sg.E12Params(**{**par_g.__dict__, "d3": 1.2000000001})
        assert not par_u.foldable
        v1 = sg.bivariate_e12(par_g, 0.4, 0.3)
        v2 = sg.bivariate_e12(par_u, 0.4, 0.3)
        assert v1 == pytest.approx(v2, rel=1e-7)


class TestCauchyProductRegrouping:
    def test_product_of_series_equals_convolved_series(self, rng):
        for _ in range(10):
            g1, g2 = rng.uniform(-1.0, 1.0, 2)
            z1, z2 = rng.uniform(-0.8, 0.8, 2)
            al, b1_, b2_ = 0.8, 0.7, 1.1
            n = 40
            a = np.array([sg.pochhammer(g1, k) * z1 ** k
                          * sg.recip_gamma(al * k + b1_) / math.factorial(k)
                          for k in range(n)])
            b = np.array([sg.pochhammer(g2, m) * z2 ** m
                          * sg.recip_gamma(al * m + b2_) / math.factorial(m)
                          for m in range(n)])
            direct = a.sum() * b.sum()
            cauchy = math.fsum(a[m] * b[k - m]
                               for k in range(n) for m in range(k + 1))
            assert cauchy == pytest.approx(direct, rel=1e-12, abs=1e-14)


class TestKernelAntiderivative:
    def test_vanishes_at_zero(self, base_params):
        assert sg.kernel_antiderivative(0.0, base_params) == 0.0

    def test_zero_weight_reduction(self):
        p0 = sg.FracParams(alpha=0.8, beta=0.5, gamma=0.0, delta=0.4)
        assert sg.kernel_antiderivative(1.0, p0) == pytest.approx(
            1.0 / math.gamma(1.5), rel=1e-14)

    def test_frozen_reference(self, base_params):
        assert sg.kernel_antiderivative(1.0, base_params) == pytest.approx(
            W1_REFERENCE, rel=1e-13)

    def test_is_primitive_of_memory_kernel(self, base_params):
        # finite difference of W matches the kernel away from 0
        t, h = 0.7, 1e-6
        dW = (sg.kernel_antiderivative(t + h, base_params)
              - sg.kernel_antiderivative(t - h, base_params)) / (2 * h)
        assert dW == pytest.approx(sg.memory_kernel(t, base_params), rel=1e-9)


class TestFracParams:
    def test_derived_halves(self, base_params):
        assert base_params.beta1 == base_params.beta / 2
        assert base_params.gamma1 == base_params.gamma / 2

    def test_beta_one_rejected(self):
        with pytest.raises(DomainError):
            sg.FracParams(alpha=0.8, beta=1.0, gamma=0.3, delta=0.5)

    def test_alpha_positive_required(self):
        with pytest.raises(DomainError):
            sg.FracParams(alpha=-0.1, beta=0.5, gamma=0.3, delta=0.5)


class TestSeriesControl:
    def test_validation(self):
        with pytest.raises(DomainError):
            sg.SeriesControl(k_max=0)
        with pytest.raises(DomainError):
            sg.SeriesControl(abs_tol=0.0)
