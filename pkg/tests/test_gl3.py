import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gl3moments.errors import ParseError, ValidationError
from gl3moments.gl3 import (
    SatakeLocal,
    coefficient,
    coefficient_table,
    degenerate_coefficients,
    eisenstein_coefficients,
    hecke_shift_identity,
    ingest_maass_data,
    l_value_at_one,
    ramanujan_tau,
    rankin_selberg_partial,
    schur_local,
    sym2_lift,
    write_maass_data,
)
from gl3moments.special_fn import LanglandsParams

# L(1, sym^2 Delta) from the Petersson norm <Delta, Delta> = 1.035362056804320922e-6:
# L(1, sym^2 f) = pi^{k+1} 2^{2k-1} <f, f> / (k-1)! at weight k = 12
L1_SYM2_DELTA = 0.6317929457278832


def test_unit_coefficient(sym2, eis_unitary):
    assert coefficient(sym2, 1, 1) == 1
    assert coefficient(eis_unitary, 1, 1) == 1


def test_ramanujan_tau():
    assert ramanujan_tau(6) == [1, -24, 252, -1472, 4830, -6048]


def test_a21_sym2_delta(sym2):
    # A(2,1) = lambda(2)^2 - 1 = tau(2)^2 / 2^11 - 1, exact rational
    exact = Fraction(24 ** 2, 2 ** 11) - 1
    assert exact == Fraction(-1472, 2048)
    assert coefficient(sym2, 2, 1) == pytest.approx(float(exact), abs=1e-15)


def test_sym2_backend_from_eigenvalue():
    theta = 0.7
    f = sym2_lift(lambda p: 2 * math.cos(theta))
    assert coefficient(f, 3, 1) == pytest.approx((2 * math.cos(theta)) ** 2 - 1, abs=1e-13)


class TestHeckeShift:
    def test_p2_m1(self, sym2):
        lhs, rhs = hecke_shift_identity(sym2, 2, 1)
        assert lhs == pytest.approx(coefficient(sym2, 2, 2))
        assert abs(lhs - rhs) < 1e-12

    def test_coprime(self, sym2):
        lhs, rhs = hecke_shift_identity(sym2, 3, 2)
        assert abs(lhs - rhs) < 1e-12

    def test_prime_power(self, sym2):
        lhs, rhs = hecke_shift_identity(sym2, 2, 4)
        assert abs(lhs - rhs) < 1e-12

    def test_not_prime(self, sym2):
        with pytest.raises(ValueError):
            hecke_shift_identity(sym2, 4, 1)


def _pieri_brute(alpha, j, k):
    """A(p,1) A(p^j, p^k) by brute-force Schur evaluation (ratio of alternants)."""
    def schur(lam):
        x = np.array(alpha, dtype=complex)
        num = np.linalg.det(np.array([[xi ** (lam[r] + 2 - r) for xi in x] for r in range(3)]))
        den = np.linalg.det(np.array([[xi ** (2 - r) for xi in x] for r in range(3)]))
        return num / den
    return schur((1, 0, 0)) * schur((j + k, k, 0))


def test_pieri_rule():
    # s_(1) s_(j+k,k,0) = s_(j+k+1,k,0) + s_(j+k,k+1,0) + s_(j+k,k,1); with xyz = 1 the last is s_(j+k-1,k-1,0)
    rng = np.random.default_rng(7)
    for _ in range(5):
        a, b = rng.uniform(-1, 1, size=2)
        alpha = (np.exp(1j * a), np.exp(1j * b), np.exp(-1j * (a + b)))
        loc = SatakeLocal(2, alpha)
        for j in range(0, 8):
            for k in range(0, 8 - j + 1):
                lhs = schur_local(loc, 1, 0) * schur_local(loc, j, k)
                rhs = schur_local(loc, j + 1, k) + schur_local(loc, j - 1, k + 1) if j >= 1 else schur_local(loc, j + 1, k)
                if k >= 1:
                    rhs += schur_local(loc, j, k - 1)
                brute = _pieri_brute(alpha, j, k)
                assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
                assert abs(lhs - brute) <= 1e-10 * max(1.0, abs(lhs))


coprime_pair = st.tuples(st.integers(1, 60), st.integers(1, 60), st.integers(1, 60), st.integers(1, 60)).filter(
    lambda t: math.gcd(t[0] * t[1], t[2] * t[3]) == 1)


@settings(max_examples=500, deadline=None)
@given(coprime_pair)
def test_multiplicativity(sym2, eis_unitary, tup):
    m1, n1, m2, n2 = tup
    for f in (sym2, eis_unitary):
        lhs = coefficient(f, m1 * m2, n1 * n2)
        rhs = coefficient(f, m1, n1) * coefficient(f, m2, n2)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@given(st.integers(1, 200), st.integers(1, 200))
def test_dual_symmetry(eis_unitary, m, n):
    assert coefficient(eis_unitary.dual(), m, n) == coefficient(eis_unitary, n, m)


@given(st.integers(1, 300), st.integers(1, 300))
def test_sym2_real_symmetric(sym2, m, n):
    a, b = coefficient(sym2, m, n), coefficient(sym2, n, m)
    assert abs(complex(a).imag) <= 1e-12 * max(1.0, abs(a))
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@pytest.mark.parametrize("m", [1, 6, 12])
@pytest.mark.parametrize("transpose", [False, True])
def test_table_matches_pointwise(sym2, eis_unitary, m, transpose):
    for f in (sym2, eis_unitary, eis_unitary.dual()):
        tab = coefficient_table(f, 300, m, transpose)
        ref = np.array([coefficient(f, m, n) if transpose else coefficient(f, n, m) for n in range(1, 301)])
        assert np.max(np.abs(tab - ref)) <= 1e-11 * max(1.0, np.max(np.abs(ref)))


class TestRankinSelberg:
    def test_one(self, sym2):
        assert rankin_selberg_partial(sym2, 1) == pytest.approx(1.0)

    def test_band_and_monotone(self, sym2):
        vals = [rankin_selberg_partial(sym2, N) for N in (10, 50, 100)]
        assert vals[-1] / 100 <= 10
        assert vals == sorted(vals)


class TestLValue:
    def test_degenerate(self):
        f = degenerate_coefficients()
        assert l_value_at_one(f, 0, 200).value == pytest.approx(1.0)
        assert l_value_at_one(f, 1, 200).value == pytest.approx(0.0)

    @pytest.mark.parametrize("order", [0, 1])
    @pytest.mark.parametrize("method", ["partial", "riesz"])
    def test_stabilizes(self, sym2, order, method):
        lo = l_value_at_one(sym2, order, 1000, method=method)
        hi = l_value_at_one(sym2, order, 10000, method=method)
        assert abs(hi.value - lo.value) <= lo.error + hi.error

    def test_functional_equation_value(self, sym2):
        v = l_value_at_one(sym2, 0, 200, method="afe")
        assert v.value == pytest.approx(L1_SYM2_DELTA, rel=1e-12)
        assert v.converged and v.error < 1e-12

    def test_derivative_routes_agree(self, sym2):
        afe = l_value_at_one(sym2, 1, 200, method="afe")
        riesz = l_value_at_one(sym2, 1, 16384, method="riesz")
        assert abs(afe.value - riesz.value) <= riesz.error

    def test_afe_rejects_eisenstein(self, eis_trivial):
        with pytest.raises(ValueError):
            l_value_at_one(eis_trivial, 0, 200, method="afe")

    def test_bad_order(self, sym2):
        with pytest.raises(ValueError):
            l_value_at_one(sym2, 2)


GOOD = """maass v1
form t_j=9.5 parity=even omega=1.0
lambda 1 1.0
lambda 2 0.5
lambda 3 -0.4
lambda 4 -0.75
lambda 5 0.1
lambda 6 -0.2
"""


class TestIngest:
    def test_empty(self):
        assert ingest_maass_data(io.StringIO("")) == []

    def test_roundtrip(self):
        recs = ingest_maass_data(io.StringIO(GOOD))
        assert len(recs) == 1 and recs[0].parity == "even"
        buf = io.StringIO()
        write_maass_data(recs, buf)
        again = ingest_maass_data(io.StringIO(buf.getvalue()))
        assert np.array_equal(again[0].lam, recs[0].lam)

    def test_lambda_one(self):
        bad = GOOD.replace("lambda 1 1.0", "lambda 1 0.99")
        with pytest.raises(ValidationError):
            ingest_maass_data(io.StringIO(bad))

    def test_parse_error_line(self):
        bad = GOOD.replace("lambda 3 -0.4", "lambda 3 abc")
        with pytest.raises(ParseError) as ei:
            ingest_maass_data(io.StringIO(bad))
        assert ei.value.line == 5

    def test_bad_header(self):
        with pytest.raises(ParseError) as ei:
            ingest_maass_data(io.StringIO("maass v2\n"))
        assert ei.value.line == 1

    def test_vendored_corpus(self, corpus):
        first = min((r for r in corpus if r.parity == "odd"), key=lambda r: r.t_j)
        assert first.t_j == pytest.approx(9.5337, abs=1e-4)
        assert len(first.lam) == 100
        for r in corpus:
            assert abs(r.lam[1] * r.lam[2] - r.lam[5]) <= 1e-6
            assert r.omega_j > 0
        assert sum(r.parity == "even" for r in corpus) == 11
        assert sum(r.parity == "odd" for r in corpus) == 19


def test_eisenstein_coefficients_are_divisor_sums():
    # parameters (0,0,0): A(n,1) = d_3(n), the ternary divisor function
    f = eisenstein_coefficients(LanglandsParams())
    d3 = [sum(1 for a in range(1, n + 1) for b in range(1, n + 1) if n % (a * b) == 0) for n in range(1, 31)]
    got = [coefficient(f, n, 1) for n in range(1, 31)]
    assert np.allclose(got, d3, atol=1e-10)
