"""Acceptance gates, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
figure of merit before asserting at the stated tolerance.
"""
import math
import time

import mpmath as mp
import numpy as np
import pytest

from gl3moments.arith import kloosterman, num_divisors, twisted_kloosterman_reduction
from gl3moments.arith import divisors, primes_up_to
from gl3moments.gl3 import eisenstein_coefficients, hecke_shift_identity
from gl3moments.kuznetsov import kuznetsov_check
from gl3moments.moments import diagonal_term
from gl3moments.special_fn import (
    GammaFactorKind,
    LanglandsParams,
    bessel_J_imag_order,
    bessel_K_imag_order,
    e,
)
from gl3moments.transforms import (
    BumpFunction,
    CalibrationStore,
    ContourSpec,
    PsiTransform,
    afe_transform_U,
    afe_transform_V,
    calibrate_voronoi_asymptotics,
    stationary_phase,
    voronoi_identity_check,
    voronoi_Psi_asymptotic,
    voronoi_Psi_exact,
)

from conftest import verdict


def test_weil_bound_suite():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    violations = 0
    worst = 0.0
    for c in range(1, 3001):
        dc = num_divisors(c)
        for a, b in rng.integers(-10 * c, 10 * c, size=(20, 2)).tolist():
            bound = dc * math.sqrt(c) * math.sqrt(math.gcd(math.gcd(a, b), c))
            s = kloosterman(a, b, c)
            worst = max(worst, abs(s) / bound)
            if abs(s) > bound * (1 + 1e-12):
                violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 60
    verdict("weil-bound", ok, f"violations={violations} max|S|/bound={worst:.4f} time={elapsed:.1f}s")
    assert violations == 0
    assert elapsed < 60


def test_twisted_kloosterman_reduction():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    done = 0
    while done < 200:
        c = int(rng.integers(1, 41))
        m = int(rng.integers(1, 11))
        n1 = int(rng.choice(divisors(m * c)))
        if m * c // n1 > 200:
            continue
        n2 = int(rng.integers(1, 60))
        p = int(rng.choice(primes_up_to(50)))
        sign = int(rng.choice([-1, 1]))
        lhs, rhs = twisted_kloosterman_reduction(m, c, n1, n2, p, sign)
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1.0))
        done += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 30
    verdict("twisted-kloosterman", ok, f"max rel={worst:.2e} time={elapsed:.1f}s")
    assert worst <= 1e-8
    assert elapsed < 30


def test_gl3_hecke_identity(sym2):
    rng = np.random.default_rng(3)
    forms = [sym2]
    for _ in range(3):
        a, b = rng.uniform(-3, 3, size=2)
        forms.append(eisenstein_coefficients(LanglandsParams.unitary(a, b)))
    worst = 0.0
    for f in forms:
        for p in primes_up_to(97).tolist():
            for m in range(1, 51):
                lhs, rhs = hecke_shift_identity(f, p, m)
                worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    ok = worst <= 1e-10
    verdict("hecke-identity", ok, f"max err={worst:.2e} over {len(forms)} forms")
    assert ok


def test_contour_shift_invariance():
    worst = 0.0
    minus, plus = GammaFactorKind("minus"), GammaFactorKind("plus")
    lo = ContourSpec(0.7)
    # 10 (y, t) points each for V and U, both gamma kinds alternating
    yt = [(0.5, 10.0), (1.0, 20.0), (3.0, 35.0), (10.0, 50.0), (50.0, 60.0),
          (200.0, 15.0), (1e3, 80.0), (2.0, 120.0), (5e4, 40.0), (7.0, 200.0)]
    for i, (y, t) in enumerate(yt):
        kind = minus if i % 2 == 0 else plus
        # the integrand grows like t^(3 sigma), so far shifts cancel badly at large t
        hi = ContourSpec(1.9 if t <= 80 else 1.2)
        for fn in (afe_transform_V, afe_transform_U):
            a, b = fn(y, t, kind, lo), fn(y, t, kind, hi)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
    # 10 x points for Psi, split over both signs and two parameter sets
    tf = BumpFunction(1.0)
    xs = [0.3, 1.0, 2.5, 5.0, 11.0, 0.7, 3.0, 8.0, 20.0, 40.0]
    for i, x in enumerate(xs):
        params = LanglandsParams() if i < 5 else LanglandsParams.unitary(0.3, 0.5)
        sign = 1 if i % 2 == 0 else -1
        # no height cut and automatic node spacing: the grid adapts to the Mellin decay
        a = PsiTransform(params, tf, sign, ContourSpec(-0.5, None, 0))(x)
        b = PsiTransform(params, tf, sign, ContourSpec(0.5, None, 0))(x)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
    ok = worst <= 1e-9
    verdict("contour-invariance", ok, f"max deviation={worst:.2e} on 30 points")
    assert ok


@pytest.mark.slow
def test_voronoi_identity(sym2, eis_trivial, eis_unitary):
    t0 = time.perf_counter()
    worst = 0.0
    for X in (50.0, 200.0):
        tf = BumpFunction(X, 9.0)
        for f in (sym2, eis_trivial, eis_unitary):
            for m, c in ((1, 1), (1, 2), (2, 3)):
                r = voronoi_identity_check(f, m, c, 1, tf, tol=1e-6)
                worst = max(worst, abs(r.lhs - r.rhs) / abs(r.lhs))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 600
    verdict("voronoi-identity", ok, f"max rel={worst:.2e} time={elapsed:.0f}s")
    assert worst <= 1e-5
    assert elapsed < 600


def test_psi_asymptotics(tmp_path):
    store = CalibrationStore(str(tmp_path / "cal.json"))
    X = 25.0
    lines = []
    ok = True
    for params in (LanglandsParams(), LanglandsParams.unitary(0.3, 0.5)):
        for sign in (1, -1):
            calibrate_voronoi_asymptotics(params, sign, store=store)
            for xX in (1e3, 1e4, 1e5, 1e6):
                x = xX / X
                bound = 3 * xX ** (-1 / 3)
                for mod in (-1, 1):
                    tf = BumpFunction(X, 1.0, modulation=(x, mod))
                    ex = voronoi_Psi_exact(x, params, tf, sign)
                    asy = voronoi_Psi_asymptotic(x, params, tf, sign, K=1, store=store)
                    dev = abs(ex / asy - 1)
                    ok &= dev <= bound
                    lines.append(f"{sign:+d} xX={xX:.0e} dev={dev:.2e}/{bound:.2e}")
    verdict("psi-asymptotics", ok, "; ".join(lines[-4:]))
    assert ok, lines


def _bump(a, b):
    def f(y):
        y = np.asarray(y, float)
        u = (2 * y - (a + b)) / (b - a)
        out = np.zeros_like(y)
        m = np.abs(u) < 1
        out[m] = np.exp(1 - 1 / (1 - u[m] ** 2))
        return out
    return f


def test_stationary_phase_main_term():
    worst = 0.0
    for x, c, p in ((300, 1, 2), (1000, 1, 3), (200, 2, 5), (100, 3, 7), (2000, 1, 11)):
        y0 = p ** -3 * c ** 6 * x ** 2
        u2 = (
            lambda y: 2 * np.sqrt(y * p) / c - 3 * np.cbrt(x * y),
            lambda y: np.sqrt(p / y) / c - np.cbrt(x) * y ** (-2 / 3),
            lambda y: -0.5 * np.sqrt(p) * y ** -1.5 / c + 2 / 3 * np.cbrt(x) * y ** (-5 / 3),
        )
        a = _bump(y0 / 2, 2 * y0)
        r = stationary_phase(u2, a, (y0 / 2, 2 * y0), validate=True)
        second = x ** -3 * c ** -10 * p ** 5 / 6
        assert abs(u2[2](y0) / second - 1) < 1e-12
        closed = a(np.array([y0]))[0] * e(-x * c ** 2 / p + 1 / 8) / math.sqrt(second)
        worst = max(worst, abs(closed / r.direct_value - 1))
    ok = worst <= 0.05
    verdict("stationary-phase", ok, f"max rel={worst:.2e} on 5 points")
    assert ok


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_kuznetsov_numeric_identity(corpus, parity):
    t0 = time.perf_counter()
    rep = kuznetsov_check(1, 1, T=9.0, M=2.0, parity=parity, forms=corpus, c_max=500)
    # spectral_total is the cusp-form sum; the Eisenstein part is reported separately
    rel = abs(rep.residual) / abs(rep.spectral_total)
    whole = abs(rep.residual) / abs(rep.spectral_total + rep.eisenstein_total)
    ok = rel <= 1e-2 and rep.n_forms > 0
    verdict(f"kuznetsov-{parity}", ok,
            f"|residual|/|cusp sum|={rel:.2e} (vs whole spectral side {whole:.2e}) forms={rep.n_forms} "
            f"time={time.perf_counter() - t0:.1f}s")
    assert rep.n_forms > 0
    assert rel <= 1e-2


@pytest.mark.slow
def test_diagonal_dual_route(sym2):
    # automatic m-truncation (V-decay cap) on both sides of the comparison
    d200 = diagonal_term(sym2, 2, 200.0, 40.0)
    d400 = diagonal_term(sym2, 2, 400.0, 80.0)
    g200, g400 = d200.relative_gap, d400.relative_gap
    ok = g200 <= 0.1 and g400 < g200
    verdict("diagonal-dual-route", ok, f"gap(200,40)={g200:.2e} gap(400,80)={g400:.2e}")
    assert g200 <= 0.1
    assert g400 < g200


def test_u_residue_law():
    worst = 0.0
    for y in (1.0, 4.0):
        u = afe_transform_U(y, 500.0, "minus")
        worst = max(worst, abs(u - (3 * math.log(500) - 3 * math.log(2 * math.pi) - math.log(y))))
    ok = worst < 0.1
    verdict("u-residue-law", ok, f"max deviation={worst:.3e}")
    assert ok


def _k_oracle(t, x):
    """K_{2it}(x) by brute-force quadrature of int_0^inf exp(-x cosh u) cos(2tu) du."""
    upper = math.acosh((x + 40.0) / x)
    nodes = mp.linspace(0, upper, int(4 + 4 * upper * (1 + t)))
    return float(mp.quad(lambda u: mp.exp(-x * mp.cosh(u)) * mp.cos(2 * t * u), nodes))


def test_bessel_dual_route():
    t0 = time.perf_counter()
    ts = (0.0, 0.5, 1.0, 2.5, 5.0)
    xs = (0.1, 0.5, 1.0, 2.0, 4.0, 7.5, 12.0, 20.0, 35.0, 60.0)
    worst_j = worst_k = 0.0
    with mp.workdps(30):
        for t in ts:
            for x in xs:
                jo = complex(mp.besselj(2j * t, x))
                ko = _k_oracle(t, x)
                worst_j = max(worst_j, abs(bessel_J_imag_order(t, x) - jo) / abs(jo))
                worst_k = max(worst_k, abs(bessel_K_imag_order(t, x) - ko) / abs(ko))
    elapsed = time.perf_counter() - t0
    ok = worst_j <= 1e-8 and worst_k <= 1e-8 and elapsed < 120
    verdict("bessel-dual-route", ok, f"J rel={worst_j:.2e} K rel={worst_k:.2e} time={elapsed:.1f}s")
    assert worst_j <= 1e-8
    assert worst_k <= 1e-8
    assert elapsed < 120
