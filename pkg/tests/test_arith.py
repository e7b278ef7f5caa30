import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gl3moments.arith import (
    KloostermanKey,
    divisors,
    eisenstein_phi,
    eisenstein_phi_n,
    eta,
    factorize,
    is_prime,
    kloosterman,
    kloosterman_complex,
    mobius,
    mod_inverse_table,
    num_divisors,
    omega_eisenstein,
    primes_up_to,
    ramanujan_sum,
    twisted_kloosterman_reduction,
    zeta,
)
from gl3moments.errors import DivisibilityError, RangeError
from gl3moments.special_fn import ln_gamma


def brute_kloosterman(a, b, c):
    return sum(cmath.exp(2j * math.pi * (d * a + pow(d, -1, c) * b) / c)
               for d in range(c) if math.gcd(d, c) == 1) if c > 1 else 1.0


class TestKloosterman:
    def test_trivial_modulus(self):
        assert kloosterman(7, 3, 1) == 1

    def test_modulus_two(self):
        assert kloosterman(1, 1, 2) == pytest.approx(1.0, abs=1e-15)

    def test_modulus_five(self):
        assert kloosterman(1, 1, 5) == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)

    def test_key_form(self):
        assert kloosterman(KloostermanKey(2, 3, 7)) == kloosterman(2, 3, 7)

    def test_range(self):
        with pytest.raises(RangeError):
            kloosterman_complex(1, 1, 10 ** 7 + 1)

    @given(st.integers(-200, 200), st.integers(-200, 200), st.integers(1, 120))
    def test_matches_brute_force(self, a, b, c):
        assert kloosterman(a, b, c) == pytest.approx(brute_kloosterman(a, b, c).real, abs=1e-9)

    @given(st.integers(-10 ** 6, 10 ** 6), st.integers(-10 ** 6, 10 ** 6), st.integers(1, 3000))
    def test_weil_bound(self, a, b, c):
        bound = num_divisors(c) * math.sqrt(c) * math.sqrt(math.gcd(math.gcd(a, b), c))
        assert abs(kloosterman(a, b, c)) <= bound * (1 + 1e-12)

    @given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 60))
    def test_symmetry(self, a, b, c):
        assert kloosterman(a, b, c) == pytest.approx(kloosterman(b, a, c), abs=1e-9)

    def test_twisted_multiplicativity(self):
        rng = np.random.default_rng(4)
        done = 0
        while done < 200:
            c1, c2 = (int(v) for v in rng.integers(1, 60, size=2))
            if math.gcd(c1, c2) != 1:
                continue
            a, b = (int(v) for v in rng.integers(-100, 100, size=2))
            lhs = kloosterman(a, b, c1 * c2)
            i1 = pow(c1, -1, c2) if c2 > 1 else 0
            i2 = pow(c2, -1, c1) if c1 > 1 else 0
            rhs = kloosterman(a * i2 * i2, b, c1) * kloosterman(a * i1 * i1, b, c2)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))
            done += 1


class TestRamanujan:
    @pytest.mark.parametrize("a", [0, 1, 5, -3])
    def test_modulus_one(self, a):
        assert ramanujan_sum(a, 1) == 1

    def test_two_four(self):
        assert ramanujan_sum(2, 4) == -2

    @pytest.mark.parametrize("p", [2, 3, 7, 101])
    def test_prime(self, p):
        assert ramanujan_sum(1, p) == -1

    def test_equals_kloosterman_zero(self):
        for c in range(1, 501):
            for a in range(0, 21):
                assert abs(ramanujan_sum(a, c) - kloosterman(0, a, c)) <= 1e-8 * max(1, c)


class TestTwistedReduction:
    def test_all_moduli_one(self):
        lhs, rhs = twisted_kloosterman_reduction(1, 1, 1, 4, 3)
        assert lhs == rhs

    def test_example(self):
        lhs, rhs = twisted_kloosterman_reduction(2, 3, 1, 1, 5, 1)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_divisibility(self):
        with pytest.raises(DivisibilityError):
            twisted_kloosterman_reduction(1, 3, 2, 1, 5)

    def test_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            c = int(rng.integers(1, 51))
            m = int(rng.integers(1, 6))
            n1 = int(rng.choice(divisors(m * c)))
            n2 = int(rng.integers(1, 30))
            p = int(rng.choice(primes_up_to(30)))
            _, rhs = twisted_kloosterman_reduction(m, c, n1, n2, p, int(rng.choice([-1, 1])))
            assert abs(rhs) <= (m * c / n1) * c * (1 + 1e-9)


class TestEisensteinData:
    def test_eta_one(self):
        assert eta(1, 0.3 + 2j) == 1

    @pytest.mark.parametrize("p", [2, 3, 13])
    def test_eta_prime_center(self, p):
        assert eta(p, 0.5) == pytest.approx(2.0)

    def test_eta_four(self):
        assert eta(4, 0.5 + 1j) == pytest.approx(1 + 2 * math.cos(math.log(4)), abs=1e-13)

    @given(st.integers(1, 3000), st.floats(-50, 50))
    def test_eta_divisor_bound(self, n, t):
        assert abs(eta(n, 0.5 + 1j * t)) <= num_divisors(n) * (1 + 1e-12)

    @pytest.mark.parametrize("t", [1.0, 5.0, 17.3])
    def test_phi_unimodular(self, t):
        assert abs(eisenstein_phi(0.5 + 1j * t)) == pytest.approx(1.0, abs=1e-9)

    def test_phi_n_at_one(self):
        s = 0.5 + 3.1j
        expect = math.pi ** s * cmath.exp(-ln_gamma(s)) / zeta(2 * s)
        assert abs(eisenstein_phi_n(1, s) - expect) <= 1e-12 * abs(expect)

    def test_omega_positive(self):
        for t in np.linspace(0.1, 100, 200):
            assert omega_eisenstein(t) > 0

    def test_zeta_values(self):
        assert zeta(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
        # zeta(1/2 + 14.134725141734693i) is the first nontrivial zero
        assert abs(zeta(0.5 + 14.134725141734693j)) < 1e-9


class TestElementary:
    def test_mobius(self):
        assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]

    def test_divisors(self):
        assert divisors(12) == [1, 2, 3, 4, 6, 12]
        assert num_divisors(720) == 30

    @given(st.integers(1, 10 ** 6))
    def test_factorize_roundtrip(self, n):
        assert math.prod(p ** k for p, k in factorize(n).items()) == n
        assert all(is_prime(p) for p in factorize(n))

    def test_primes(self):
        assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]

    @given(st.integers(2, 5000))
    def test_inverse_table(self, c):
        d, dbar = mod_inverse_table(c)
        assert np.all((d * dbar) % c == 1)
        assert len(d) == sum(1 for k in range(c) if math.gcd(k, c) == 1)
