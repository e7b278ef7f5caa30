import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gl3moments.errors import PoleError
from gl3moments.special_fn import (
    GammaFactorKind,
    LanglandsParams,
    bessel_J_imag_order,
    bessel_K_imag_order,
    e,
    gamma_ratio_afe,
    ln_gamma,
    mollifier_F,
    voronoi_gamma,
)

# frozen oracle values (mpmath at 30 digits)
LN_GAMMA_HALF = 0.57236494292470008707
ABS_GAMMA_I = 0.52156404686494127  # sqrt(pi / sinh(pi)), reflection formula
J0_1 = 0.76519768655796655145
K0_1 = 0.42102443824070833334


def test_e_is_unit_exponential():
    assert e(0.25) == pytest.approx(1j)
    assert e(1.0) == pytest.approx(1.0)


class TestLnGamma:
    def test_one(self):
        assert abs(ln_gamma(1.0)) < 1e-15

    def test_half(self):
        assert ln_gamma(0.5).real == pytest.approx(LN_GAMMA_HALF, rel=1e-13)

    def test_imaginary_unit(self):
        assert abs(cmath.exp(ln_gamma(1j))) == pytest.approx(ABS_GAMMA_I, rel=1e-12)

    def test_large_argument(self):
        z = 3e5 + 7e5j
        ref = complex(mp.loggamma(mp.mpc(z.real, z.imag)))
        assert abs(ln_gamma(z) - ref) <= 1e-12 * abs(ref)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0.25, 70.0), st.floats(-70.0, 70.0))
    def test_recurrence(self, x, y):
        z = complex(x, y)
        ratio = cmath.exp(ln_gamma(z + 1) - ln_gamma(z))
        assert abs(ratio - z) <= 1e-11 * abs(z)

    def test_recurrence_grid(self):
        rng = np.random.default_rng(0)
        r = rng.uniform(0, 100, 1000)
        th = rng.uniform(-np.pi / 2, np.pi / 2, 1000)
        z = r * np.exp(1j * th)
        z = z[z.real >= 0.25]
        ratio = np.exp(ln_gamma(z + 1) - ln_gamma(z))
        assert np.max(np.abs(ratio - z) / np.abs(z)) <= 1e-11


class TestMollifier:
    def test_origin(self):
        assert mollifier_F(0.0, 16) == 1.0

    def test_imaginary_decay(self):
        tau, A = 20.0, 16
        assert abs(mollifier_F(1j * tau, A)) == pytest.approx(math.cosh(math.pi * tau / A) ** (-3 * A), rel=1e-12)

    def test_pole(self):
        with pytest.raises(PoleError):
            mollifier_F(8.0, 16)

    @given(st.floats(-7.0, 7.0), st.floats(-30.0, 30.0))
    def test_even(self, x, y):
        u = complex(x, y)
        a, b = mollifier_F(u, 16), mollifier_F(-u, 16)
        assert abs(a - b) <= 1e-14 * max(1.0, abs(a))


class TestBessel:
    def test_j0(self):
        assert bessel_J_imag_order(0.0, 1.0) == pytest.approx(J0_1, rel=1e-12)

    def test_k0(self):
        assert bessel_K_imag_order(0.0, 1.0) == pytest.approx(K0_1, rel=1e-12)

    @given(st.floats(0.0, 6.0), st.floats(0.05, 40.0))
    @settings(deadline=None)
    def test_j_conjugation(self, t, x):
        a = bessel_J_imag_order(t, x)
        b = bessel_J_imag_order(-t, x)
        assert abs(b - a.conjugate()) <= 1e-12 * max(1.0, abs(a))

    @given(st.floats(0.0, 6.0), st.floats(0.05, 40.0))
    @settings(deadline=None)
    def test_k_even(self, t, x):
        a, b = bessel_K_imag_order(t, x), bessel_K_imag_order(-t, x)
        assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300)

    def test_j_series_vs_integral(self):
        ref = complex(mp.besselj(2j, 10))
        assert abs(bessel_J_imag_order(1.0, 10.0) - ref) <= 1e-9 * abs(ref)

    def test_k_two_routes(self):
        a = bessel_K_imag_order(2.0, 5.0, method="integral")
        b = bessel_K_imag_order(2.0, 5.0, method="series")
        assert abs(a - b) <= 1e-8 * abs(b)


class TestGammaRatio:
    def test_pole_is_reported(self):
        with pytest.raises(PoleError):
            gamma_ratio_afe(-0.5 + 1j, 1.0, GammaFactorKind("minus"))

    def test_exact_one_at_origin(self):
        assert gamma_ratio_afe(0.0, 37.5, GammaFactorKind("minus")) == 1.0

    @pytest.mark.parametrize("sigma", [1 / 7, -1 / 7])
    @pytest.mark.parametrize("t", [100.0, 400.0])
    def test_stirling_size(self, sigma, t):
        # six Gamma((s +- it)/2) factors, each shifted by sigma/2, and pi^{-3 sigma}
        r = abs(gamma_ratio_afe(sigma, t, GammaFactorKind("minus")))
        target = (t / (2 * math.pi)) ** (3 * sigma)
        assert 0.5 <= r / target <= 2.0

    def test_matches_gamma_products(self):
        t, u = 57.0, 0.3 - 1.7j
        with mp.workdps(30):
            def g(s):
                return mp.pi ** (-3 * s) * (mp.gamma((s - 1j * t) / 2) * mp.gamma((s + 1j * t) / 2)) ** 3
            ref = complex(g(0.5 + u) / g(0.5))
        assert abs(gamma_ratio_afe(u, t, GammaFactorKind("minus")) - ref) <= 1e-11 * abs(ref)

    # Re(1/2 + u) > 0 keeps clear of the Gamma poles at (1/2 + u +- it)/2 = -k
    @given(st.floats(-0.45, 1.5), st.floats(-20, 20), st.floats(1.0, 80.0))
    @settings(deadline=None)
    def test_conjugation(self, x, y, t):
        kind = GammaFactorKind("minus")
        u = complex(x, y)
        a, b = gamma_ratio_afe(u, t, kind), gamma_ratio_afe(u.conjugate(), t, kind)
        assert abs(b - a.conjugate()) <= 1e-10 * max(1.0, abs(a))


class TestVoronoiGamma:
    def test_zero_at_origin(self):
        assert voronoi_gamma(0.0, 0, LanglandsParams()) == 0

    @pytest.mark.parametrize("ell", [0, 1])
    def test_recurrence(self, ell):
        # gamma_ell(s) = pi^{-3s-3/2}/2 * prod Gamma((1+s+ell+a)/2) / Gamma((-s+ell-a)/2);
        # stepping s by 2 multiplies each factor by (1+s+ell+a)/2 * ((-s+ell-a)/2 - 1)
        params = LanglandsParams.unitary(0.4, -1.1)
        s = -0.3 + 2.2j
        ratio = voronoi_gamma(s + 2, ell, params) / voronoi_gamma(s, ell, params)
        expect = math.pi ** -6
        for a in params.as_tuple():
            expect *= (1 + s + ell + a) / 2 * ((-s + ell - a) / 2 - 1)
        assert abs(ratio - expect) <= 1e-10 * abs(expect)

    def test_unitary_value(self):
        params = LanglandsParams(1j, -2j, 1j)
        s = -0.5 + 3j
        with mp.workdps(30):
            ref = mp.pi ** (-3 * s - 1.5) / 2
            for a in params.as_tuple():
                ref *= mp.gamma((1 + s + a) / 2) / mp.gamma((-s - a) / 2)
        ref = complex(ref)
        assert abs(voronoi_gamma(s, 0, params) - ref) <= 1e-10 * abs(ref)
