"""Kuznetsov trace formula for SL(2, Z), even and odd forms.

Spectral side: sum_j h(t_j) omega_j lambda_j(m) lambda_j(n), plus for even
forms the continuous term (1/4 pi) int h(t) omega(t) conj(eta(m, 1/2+it))
eta(n, 1/2+it) dt.  Geometric side: delta(m, n) H / 2 plus
sum_c (S(m, n; c) H^+(x) +- S(-m, n; c) H^-(x)) / 2c with x = 4 pi sqrt(mn)/c,
the sign being + for even and - for odd forms.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .arith import eta, kloosterman, omega_eisenstein
from .errors import AccuracyError, NonDecayingInputError
from .gl3 import MaassFormRecord
from .special_fn import (
    bessel_J_combined_vec,
    bessel_J_imag_order_scaled,
    bessel_K_scaled_vec,
    e,
)

__all__ = [
    "EvenTestFunction",
    "gaussian_pair",
    "zero_weight",
    "transform_H",
    "transform_Hplus",
    "transform_Hplus_direct",
    "transform_Hminus",
    "hplus_fourier_form",
    "hplus_stationary_point",
    "TraceFormulaReport",
    "geometric_side",
    "spectral_side",
    "kuznetsov_check",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class EvenTestFunction:
    """Even spectral test function h(t) with an effective cutoff t_max.

    ``window`` optionally restricts quadrature to where h is not negligible
    (on t >= 0).
    """

    fn: Callable
    t_max: float
    window: tuple | None = None
    name: str = "h"
    is_zero: bool = False

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def support(self) -> tuple:
        if self.window is not None:
            return self.window
        return (0.0, self.t_max)


def gaussian_pair(T: float, M: float) -> EvenTestFunction:
    """k(t) = exp(-(t-T)^2/M^2) + exp(-(t+T)^2/M^2); cut at T + 12 M."""
    if not (T >= 0 and M > 0):
        raise ValueError("need T >= 0 and M > 0")

    def k(t):
        return np.exp(-((t - T) / M) ** 2) + np.exp(-((t + T) / M) ** 2)

    # exp(-144) is below double precision relative to the peak
    return EvenTestFunction(k, T + 12 * M, (max(0.0, T - 12 * M), T + 12 * M), f"k(T={T:g},M={M:g})")


def zero_weight() -> EvenTestFunction:
    return EvenTestFunction(lambda t: np.zeros_like(np.asarray(t, dtype=float)), 1.0, name="0", is_zero=True)


def _as_test_function(h) -> EvenTestFunction:
    if isinstance(h, EvenTestFunction):
        return h
    if not callable(h):
        raise TypeError("h must be callable")
    probe = np.concatenate([np.linspace(0, 10, 201), np.logspace(1, 4, 121)])
    vals = np.abs(np.asarray(h(probe), dtype=float)) * (1 + probe) ** 2
    peak = vals.max()
    if peak == 0:
        return EvenTestFunction(h, 1.0, name="h", is_zero=True)
    if vals[-1] > 1e-16 * peak:
        raise NonDecayingInputError("h(t) t^2 does not decay by t = 1e4")
    big = np.nonzero(vals > 1e-17 * peak)[0]
    return EvenTestFunction(h, float(probe[min(big[-1] + 1, len(probe) - 1)]), name="h")


def _panels(a: float, b: float, width: float):
    n = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, n + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    t = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * _GL_W
    return t.ravel(), np.broadcast_to(w, t.shape).ravel()


def _integrate_half_line(g: Callable, h: EvenTestFunction, tol: float, width: float = 1.0):
    """int_0^inf g(t) dt over the support of h, with panel doubling as the error check.

    The tolerance is relative to max(|value|, 1e-3 int |g|).
    """
    a, b = h.support()
    prev = None
    for _ in range(6):
        t, w = _panels(a, b, width)
        gt = g(t)
        val = complex(np.sum(w * gt))
        # cancellation inside the integral limits the attainable relative accuracy
        scale = max(abs(val), 1e-3 * float(np.sum(w * np.abs(gt))), 1e-300)
        if prev is not None:
            err = abs(val - prev)
            if err <= tol * scale:
                return val, err
        prev = val
        width /= 2
    raise AccuracyError("spectral quadrature did not converge", value=val, error=abs(val - prev))


def transform_H(h, parity: str = "even", tol: float = 1e-10) -> float:
    """H = (2/pi) int_0^inf h(t) tanh(pi t) t dt.

    The odd-form version (1/pi) int over the whole line is the same number
    for even h.
    """
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    h = _as_test_function(h)
    if h.is_zero:
        return 0.0
    val, _ = _integrate_half_line(lambda t: h(t) * np.tanh(np.pi * t) * t, h, tol)
    return float(2 / math.pi * val.real)


def transform_Hplus(h, x: float, tol: float = 1e-9) -> float:
    """H^+(x) = 2i int J_{2it}(x) h(t) t / cosh(pi t) dt.

    Folded to t >= 0 with (J_{2it} - J_{-2it})/cosh(pi t), which is purely
    imaginary, so the value is real.
    """
    h = _as_test_function(h)
    if h.is_zero:
        return 0.0
    val, _ = _integrate_half_line(lambda t: 2j * bessel_J_combined_vec(t, x) * h(t) * t, h, tol)
    return float(val.real)


def transform_Hplus_direct(h, x: float, tol: float = 1e-9) -> complex:
    """H^+ from its definition over the whole line, with no symmetry folding."""
    h = _as_test_function(h)
    if h.is_zero:
        return 0j
    a, b = h.support()

    def g(t):
        jj = np.array([bessel_J_imag_order_scaled(float(s), x) for s in t])
        return 2j * jj * h(t) * t

    # both halves of the line, integrated separately
    pos, _ = _integrate_half_line(g, h, tol)
    neg, _ = _integrate_half_line(lambda t: g(-t), h, tol)
    return complex(pos + neg)


def transform_Hminus(h, x: float, tol: float = 1e-9) -> float:
    """H^-(x) = (4/pi) int K_{2it}(x) sinh(pi t) h(t) t dt.

    Uses sinh(pi t) K_{2it} = tanh(pi t) cosh(pi t) K_{2it} so no factor of
    size e^{pi t} meets a factor of size e^{-pi t}.
    """
    h = _as_test_function(h)
    if h.is_zero:
        return 0.0
    val, _ = _integrate_half_line(lambda t: bessel_K_scaled_vec(t, x) * np.tanh(np.pi * t) * h(t) * t, h, tol)
    return float(8 / math.pi * val.real)


# ---------------------------------------------------------------------------
# Fourier form of the H^+ transform
# ---------------------------------------------------------------------------


def _k_star_hat(T, M, afe_y, kind, part):
    """xi -> int u^{part-1} e^{-u^2} V(afe_y, M u + T) e(-u xi) du on a Gauss grid in u."""
    from .transforms import afe_transform_V

    u, w = _panels(-7.0, 7.0, 0.5)
    if afe_y is None:
        vals = np.ones_like(u)
    else:
        vals = np.array([afe_transform_V(afe_y, M * uu + T, kind).real for uu in u])
    amp = w * np.exp(-u * u) * vals * (u if part == 2 else 1.0)

    def khat(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.empty(xi.shape, dtype=complex)
        step = max(1, 2_000_000 // len(u))
        for i in range(0, len(xi), step):
            out[i : i + step] = np.exp(-2j * np.pi * np.outer(xi[i : i + step], u)) @ amp
        return out

    return khat


def hplus_fourier_form(x: float, T: float, M: float, afe_y: float | None = None, params=None,
                       part: int = 1) -> complex:
    """4T int khat*(xi) cos(x cosh(pi xi / M)) e(-T xi / M) dxi.

    k*(u) = e^{-u^2} V(afe_y, M u + T) (V dropped when ``afe_y`` is None).
    ``part=2`` gives the companion piece from the M u part of t = M u + T,
    4 M int (u k*)^(xi) cos(...) e(...) dxi, so that part 1 + part 2 is the
    H^+ transform of e^{-(t-T)^2/M^2} V(afe_y, t) up to exponentially small
    terms.
    """
    if part not in (1, 2):
        raise ValueError("part must be 1 or 2")
    if T == 0 and part == 1:
        return 0j
    kind = None
    if afe_y is not None:
        from .special_fn import GammaFactorKind, LanglandsParams

        kind = GammaFactorKind("minus", params if params is not None else LanglandsParams())
    khat = _k_star_hat(T, M, afe_y, kind, part)
    # khat decays like exp(-pi^2 xi^2); |xi| <= 2.5 leaves e^{-61}
    xm = 2.5
    rate = 2 * math.pi * T / M + x * math.sinh(math.pi * xm / M) * math.pi / M + 1.0
    xi, w = _panels(-xm, xm, min(0.25, 6 * math.pi / rate))
    integrand = khat(xi) * np.cos(x * np.cosh(np.pi * xi / M)) * e(-T * xi / M)
    pref = 4 * T if part == 1 else 4 * M
    return complex(pref * np.sum(w * integrand))


def hplus_stationary_point(x: float, T: float, M: float, sign: int = -1) -> float:
    """Root of the phase derivative -T/M + sign (x / 2M) sinh(pi xi / M) of the Fourier form."""
    # -T/M + sign * x/(2M) sinh(pi xi/M) = 0  ->  sinh(pi xi / M) = sign * 2T/x
    f = lambda xi: -T / M + sign * x / (2 * M) * math.sinh(math.pi * xi / M)
    guess = M / math.pi * math.asinh(sign * 2 * T / x)
    return float(optimize.brentq(f, guess - 1, guess + 1, xtol=1e-14))


# ---------------------------------------------------------------------------
# the trace formula
# ---------------------------------------------------------------------------


@dataclass
class TraceFormulaReport:
    spectral_total: float
    eisenstein_total: float
    diagonal_term: float
    kloosterman_plus: float
    kloosterman_minus: float
    c_truncation: int
    residual: float
    parity: str = "even"
    tail_estimate: float = 0.0
    assumed_complete_to: float | None = None
    n_forms: int = 0
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _corpus_hash(forms: Sequence[MaassFormRecord]) -> str:
    hsh = hashlib.sha256()
    for f in sorted(forms, key=lambda r: r.t_j):
        hsh.update(f"{f.t_j:.12f}|{f.parity}|{f.omega_j:.12e}|".encode())
        hsh.update(np.asarray(f.lam, dtype="<f8").tobytes())
    return hsh.hexdigest()[:16]


def geometric_side(m: int, n: int, h, parity: str = "even", c_max: int = 200, tol: float = 1e-9) -> dict:
    """Diagonal and Kloosterman-Bessel sums, c <= c_max, ascending c.

    ``kloosterman_minus`` is sum S(-m, n; c) H^-(x)/2c without the parity sign.
    ``tail_estimate`` extrapolates the last H-values with the Weil bound and
    H(x) = O(x) as x -> 0.
    """
    if m < 1 or n < 1:
        raise ValueError("m, n must be positive")
    if c_max < 1:
        raise ValueError("c_max must be at least 1")
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    h = _as_test_function(h)
    out = {"diagonal_term": 0.0, "kloosterman_plus": 0.0, "kloosterman_minus": 0.0, "c_truncation": int(c_max),
           "tail_estimate": 0.0}
    if h.is_zero:
        return out
    if m == n:
        out["diagonal_term"] = 0.5 * transform_H(h, parity)
    kp = km = 0.0
    last = 0.0
    for c in range(1, c_max + 1):
        x = 4 * math.pi * math.sqrt(m * n) / c
        hp = transform_Hplus(h, x, tol)
        hm = transform_Hminus(h, x, tol)
        kp += kloosterman(m, n, c) * hp / (2 * c)
        km += kloosterman(-m, n, c) * hm / (2 * c)
        last = abs(hp) + abs(hm)
    out["kloosterman_plus"] = kp
    out["kloosterman_minus"] = km
    # sum_{c > C} d(c) sqrt(c) (C / c) last / 2c  ~  last * C * (log C + 2 gamma) / sqrt(C)
    out["tail_estimate"] = float(last * math.sqrt(c_max) * (math.log(c_max) + 1.2))
    return out


def spectral_side(m: int, n: int, h, parity: str = "even", forms: Sequence[MaassFormRecord] = (),
                  tol: float = 1e-9) -> tuple:
    """(cusp, eisenstein) parts of the spectral side.  No continuous part for odd forms."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    h = _as_test_function(h)
    if h.is_zero:
        return 0.0, 0.0
    chosen = sorted((f for f in forms if f.parity == parity), key=lambda r: r.t_j)
    cusp = 0.0
    for f in chosen:
        cusp += float(h(np.array([f.t_j]))[0]) * f.omega_j * f.coefficient(m) * f.coefficient(n)
    eis = 0.0
    if parity == "even":
        def g(t):
            s = 0.5 + 1j * t
            return h(t) * omega_eisenstein(t) * np.conj(eta(m, s)) * eta(n, s)

        # the integrand at -t is the conjugate of that at t
        val, _ = _integrate_half_line(g, h, tol)
        eis = float(val.real / (2 * math.pi))
    return cusp, eis


def kuznetsov_check(m: int, n: int, T: float | None = None, M: float | None = None, parity: str = "even",
                    forms: Sequence[MaassFormRecord] = (), c_max: int = 500, h=None,
                    assumed_complete_to: float | None = None) -> TraceFormulaReport:
    """Both sides of the trace formula with h = k(t; T, M) (or an explicit ``h``)."""
    if h is None:
        if T is None or M is None:
            raise ValueError("give T and M or an explicit test function")
        h = gaussian_pair(T, M)
    h = _as_test_function(h)
    cusp, eis = spectral_side(m, n, h, parity, forms)
    geo = geometric_side(m, n, h, parity, c_max)
    sgn = 1.0 if parity == "even" else -1.0
    rhs = geo["diagonal_term"] + geo["kloosterman_plus"] + sgn * geo["kloosterman_minus"]
    chosen = [f for f in forms if f.parity == parity]
    if assumed_complete_to is None and chosen:
        assumed_complete_to = max(f.t_j for f in chosen)
    return TraceFormulaReport(
        spectral_total=cusp,
        eisenstein_total=eis,
        diagonal_term=geo["diagonal_term"],
        kloosterman_plus=geo["kloosterman_plus"],
        kloosterman_minus=geo["kloosterman_minus"],
        c_truncation=geo["c_truncation"],
        residual=(cusp + eis) - rhs,
        parity=parity,
        tail_estimate=geo["tail_estimate"],
        assumed_complete_to=assumed_complete_to,
        n_forms=len(chosen),
        provenance={"corpus_hash": _corpus_hash(chosen), "c_max": int(c_max), "test_function": h.name,
                    "m": int(m), "n": int(n), "quadrature_tol": 1e-9},
    )
