"""Main terms of the first spectral moment of L(1/2, f x u_j) twisted by lambda_j(p).

The diagonal contribution is

    D = A(p,1)/(2 p^{1/2}) sum_m A(1,m)/m H_{m,p} - 1/(2 p^{3/2}) sum_m A(1,m)/m H_{mp,p},
    H_{m,p} = (2/pi) int_0^inf k(t) V(m^2 p, t) tanh(pi t) t dt,

and shifting the V contour to the left picks up L(1, f~) at u = 0, which gives
the closed form L(1, f~) (A(p,1) p - 1) p^{-3/2} pi^{-1} int_0^inf k tanh(pi t) t dt.
Both are computed (routes A and B) and compared.  For the derivative the
kernel U has a double pole at u = 0 and the residue brings in L'(1, f~),
log(2 pi), log p and log |t|.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from .arith import divisors, eta, is_prime, omega_eisenstein
from .errors import AccuracyError, CorpusInsufficientError, TruncationError, ValidationError
from .gl3 import GL3Coefficients, MaassFormRecord, coefficient, coefficient_table, l_value_at_one
from .special_fn import GammaFactorKind, LanglandsParams, gamma_ratio_afe, mollifier_F
from .transforms import afe_transform_V

__all__ = [
    "SpectralWeight",
    "MomentPrediction",
    "DiagonalTerm",
    "DerivativeDiagonal",
    "weight_integral",
    "diagonal_term",
    "derivative_diagonal_term",
    "derivative_constant",
    "predict_moment",
    "empirical_moment",
    "predictions_to_csv",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_L_TRUNCATION = 1 << 14


@dataclass(frozen=True)
class SpectralWeight:
    """k(t) = exp(-(t-T)^2/M^2) + exp(-(t+T)^2/M^2)."""

    T: float
    M: float

    def __post_init__(self):
        if not (self.T > 0 and self.M > 0):
            raise ValueError("need T > 0 and M > 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-((t - self.T) / self.M) ** 2) + np.exp(-((t + self.T) / self.M) ** 2)

    def in_band(self, eps: float = 0.0) -> bool:
        """T^{3/8+eps} < M <= T^{1-eps}; advisory only."""
        return self.T ** (0.375 + eps) < self.M <= self.T ** (1.0 - eps)

    @property
    def window(self) -> tuple:
        # exp(-144) is far below double precision relative to the peak
        return max(0.0, self.T - 12 * self.M), self.T + 12 * self.M


def _t_nodes(w: SpectralWeight):
    """Gauss-Legendre nodes and weights on the window of k, panels of width <= M/2."""
    a, b = w.window
    n = max(4, int(math.ceil((b - a) / (0.5 * w.M))))
    edges = np.linspace(a, b, n + 1)
    lo, hi = edges[:-1], edges[1:]
    t = (0.5 * (hi - lo)[:, None] * _GL_X + 0.5 * (hi + lo)[:, None]).ravel()
    wt = (0.5 * (hi - lo)[:, None] * _GL_W).ravel()
    return t, wt


def weight_integral(T: float, M: float, log_factor: bool = False, whole_line: bool = False) -> float:
    """int_0^inf k(t) tanh(pi t) t (log t)^{0 or 1} dt, or over the whole line.

    The integrand is even in t, so the whole-line value is twice the half-line one.
    """
    w = SpectralWeight(T, M)
    a, b = w.window

    def g(t):
        val = float(w(t)) * math.tanh(math.pi * t) * t
        return val * math.log(t) if log_factor and t > 0 else val

    pts = [x for x in (1.0, T - 3 * M, T, T + 3 * M) if a < x < b]
    val, err = integrate.quad(g, a, b, points=pts or None, epsabs=0.0, epsrel=1e-12, limit=400)
    if err > 1e-10 * abs(val):
        raise AccuracyError("weight integral did not converge", value=val, error=err)
    return 2 * val if whole_line else val


# ---------------------------------------------------------------------------
# diagonal terms
# ---------------------------------------------------------------------------


def _check_prime(p):
    if not (isinstance(p, (int, np.integer)) and is_prime(int(p))):
        raise ValidationError(f"p={p} is not a prime")
    return int(p)


def _side(f: GL3Coefficients, hecke_side: str):
    """(coefficients, gamma kind) seen by the chosen side of the approximate functional equation."""
    if hecke_side == "direct":
        return f, "minus"
    if hecke_side == "dual":
        return f.dual(), "plus"
    raise ValueError("hecke_side must be 'direct' or 'dual'")


def _auto_m_truncation(g: GL3Coefficients, p: int, t_hi: float) -> int:
    """m-range for the diagonal sums.

    V(y, t) is about 1e-6 once y exceeds 1000 (t/2 pi)^3, which caps m.  Below
    the cap, stop at the first power of two where the Rankin-Selberg-style tail
    3 sqrt(mean |A|^2) / sqrt(N) is under 1e-3 of the running sum.
    """
    n_cap = int(math.ceil(math.sqrt(1000.0 * (t_hi / (2 * math.pi)) ** 3 / p)))
    N = 512
    while N < n_cap:
        a = coefficient_table(g, N, 1, transpose=True)
        running = abs(np.sum(a / np.arange(1, N + 1)))
        tail = 3.0 * math.sqrt(float(np.mean(np.abs(a) ** 2))) / math.sqrt(N)
        if tail <= 1e-3 * running:
            return N
        N *= 2
    return max(n_cap, 1)


class _KernelLine:
    """The AFE kernel on one vertical line, pre-integrated against a t-weight.

    For a weight w(t) on the window of k the method ``apply`` returns
    sum_t w(t) (1/2 pi i) int E(u) F(u) gamma(1/2+u, t)/gamma(1/2, t) du/u^power
    for any u-profile E, together with a half-step error estimate.
    """

    def __init__(self, weight: SpectralWeight, arch, sign: str, power: int, A: int = 16):
        a, b = weight.window
        t_hi = max(b, math.e)
        sigma = min(1.0, 1.0 / math.log(t_hi))
        npu = max(20, int(math.ceil(10.0 / sigma)))
        h = 1.0 / npu
        n = int(math.ceil(15.0 / h))
        self.u = sigma + 1j * h * np.arange(-n, n + 1)
        self.h = h
        self.n = n
        self.t, self.wt = _t_nodes(weight)
        kind = GammaFactorKind(sign, arch)
        base = mollifier_F(self.u, A) / self.u ** power
        G = np.empty((len(self.t), len(self.u)), dtype=complex)
        for i, t in enumerate(self.t):
            G[i] = gamma_ratio_afe(self.u, float(t), kind) * base
        self.G = G
        self.k = weight(self.t)
        self.tanh_t = np.tanh(np.pi * self.t) * self.t

    def profile(self, tweight):
        """u-profile of (2/pi) int tweight(t) k tanh(pi t) t (kernel) dt."""
        w = (2 / math.pi) * self.wt * self.k * self.tanh_t * tweight(self.t)
        return w @ self.G

    def apply(self, prof, E):
        vals = prof * E
        full = self.h * vals.sum() / (2 * math.pi)
        half = 2 * self.h * vals[(self.n % 2) :: 2].sum() / (2 * math.pi)
        return complex(full), abs(full - half)


def _dirichlet_on_line(a: np.ndarray, u: np.ndarray) -> np.ndarray:
    """sum_{m <= N} a_m m^{-1-2u} at every node u."""
    m = np.arange(1, len(a) + 1, dtype=float)
    lm = np.log(m)
    c = a / m
    out = np.empty(len(u), dtype=complex)
    step = max(1, 4_000_000 // len(a))
    for i in range(0, len(u), step):
        out[i : i + step] = np.exp(-2 * np.outer(u[i : i + step], lm)) @ c
    return out


def _real_if_close(z: complex, scale: float = 1.0):
    z = complex(z)
    return z.real if abs(z.imag) <= 1e-9 * max(abs(z), scale) else z


@dataclass
class DiagonalTerm:
    """Route A (literal truncated sums) and route B (closed form) of a diagonal term."""

    value: complex
    route_a: complex
    route_b: complex
    gap: float
    m_truncation: int
    pieces: dict = field(default_factory=dict)

    def __float__(self):
        return float(np.real(self.value))

    @property
    def relative_gap(self) -> float:
        return self.gap / abs(self.route_b) if self.route_b else math.inf


def _routes_setup(f, p, T, M, hecke_side, m_truncation):
    p = _check_prime(p)
    g, sign = _side(f, hecke_side)
    weight = SpectralWeight(T, M)
    if m_truncation is None:
        N = _auto_m_truncation(g, p, weight.window[1])
    else:
        N = int(m_truncation)
        if N < 1:
            raise TruncationError("m_truncation must be at least 1")
    # the gamma factors are those of f; the side picks gamma_- or gamma_+
    arch = f.arch if f.arch is not None else LanglandsParams()
    return p, g, sign, weight, N, arch


def _l_value(g: GL3Coefficients, order: int, l_truncation: int):
    """L^(order)(1, g): functional-equation route when g's L-function is entire, Riesz means otherwise."""
    if g.arch is not None and g.eisenstein_params is None:
        return l_value_at_one(g, order, 1000, method="afe")
    return l_value_at_one(g, order, l_truncation, method="riesz")


def diagonal_term(f: GL3Coefficients, p: int, T: float, M: float, hecke_side: str = "direct",
                  m_truncation: int | None = None, l_truncation: int = _L_TRUNCATION) -> DiagonalTerm:
    """D for one side of the approximate functional equation.

    Route A evaluates the truncated m-sums through the Dirichlet polynomial
    sum_{m<=N} A(1,m) m^{-1-2u} on the V contour, with (m^2 p)^{-u} and
    (m^2 p^3)^{-u}; that is exactly the literal sum of H_{m,p} and H_{mp,p}.
    Route B is L(1, f~)(A(p,1) p - 1) p^{-3/2} pi^{-1} int_0^inf k tanh(pi t) t dt.
    The dual side uses A(1,p) and L(1, f) instead.
    """
    p, g, sign, weight, N, arch = _routes_setup(f, p, T, M, hecke_side, m_truncation)
    line = _KernelLine(weight, arch, sign, 1)
    a = coefficient_table(g, N, 1, transpose=True)  # A(1, m) of this side
    Dn = _dirichlet_on_line(a, line.u)
    prof = line.profile(lambda t: np.ones_like(t))
    s1, e1 = line.apply(prof, np.exp(-line.u * math.log(p)) * Dn)
    s3, e3 = line.apply(prof, np.exp(-3 * line.u * math.log(p)) * Dn)
    Ap = coefficient(g, p, 1)
    route_a = Ap / (2 * math.sqrt(p)) * s1 - s3 / (2 * p ** 1.5)
    quad_err = abs(Ap) / (2 * math.sqrt(p)) * e1 + e3 / (2 * p ** 1.5)

    L = _l_value(g.dual(), 0, l_truncation)  # sum A(1,m)/m of this side
    W = weight_integral(T, M)
    route_b = L.value * (Ap * p - 1) / (p ** 1.5 * math.pi) * W
    gap = abs(route_a - route_b)
    scale = abs(route_b)
    pieces = {
        "route_a": _real_if_close(route_a, scale),
        "route_b": _real_if_close(route_b, scale),
        "abs_gap": gap,
        "relative_gap": gap / scale if scale else math.inf,
        "sum_H_m_p": _real_if_close(s1, scale),
        "sum_H_mp_p": _real_if_close(s3, scale),
        "A_p": _real_if_close(Ap),
        "L_at_1": L.value,
        "L_error": L.error,
        "weight_integral": W,
        "quadrature_error": quad_err,
        "m_truncation": N,
        "hecke_side": hecke_side,
    }
    return DiagonalTerm(_real_if_close(route_a, scale), pieces["route_a"], pieces["route_b"], gap, N, pieces)


def derivative_constant(L: float, dL: float, p: int, shift: int = 1) -> float:
    """K = 2 L'(1) - 3 L(1) log(2 pi) - shift * L(1) log p.

    ``shift`` = 1 is the residue constant of the sum over H_{m,p}; the sum
    over H_{mp,p} carries (m^2 p^3)^{-u} and needs ``shift`` = 3.
    """
    return 2 * dL - 3 * L * math.log(2 * math.pi) - shift * L * math.log(p)


@dataclass
class DerivativeDiagonal:
    """Diagonal of the derivative moment split into its log|t| part and its constant part.

    Integrals are over the whole line.  ``main_const`` uses the exact residue
    constants; ``pieces['const_single_K']`` is the variant that applies the
    constant K of the H_{m,p} sum to both sums, which is off by
    L(1) log p p^{-3/2} pi^{-1} int k tanh(pi t) t dt.
    """

    main_log: complex
    main_const: complex
    route_a: tuple
    route_b: tuple
    pieces: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.main_log
        yield self.main_const


def derivative_diagonal_term(f: GL3Coefficients, p: int, T: float, M: float, hecke_side: str = "direct",
                             m_truncation: int | None = None,
                             l_truncation: int = _L_TRUNCATION) -> DerivativeDiagonal:
    """Diagonal of the derivative moment, routes A and B for both terms.

    Route A: the truncated m-sums with U in place of V give the total; the
    log|t| term is the V-based sum weighted by 3 log t, and the constant term
    is the difference.  Route B: residues at the double pole,

        3 L log|t| + K1 for H_{m,p},   3 L log|t| + K2 for H_{mp,p},
        K1 = 2L' - 3L log 2pi - L log p,   K2 = 2L' - 3L log 2pi - 3L log p,

    so main_log = 3L (A p - 1) I_log / (2 p^{3/2} pi) and
    main_const = (A p K1 - K2) I / (2 p^{3/2} pi), I over the whole line.
    """
    p, g, sign, weight, N, arch = _routes_setup(f, p, T, M, hecke_side, m_truncation)
    a = coefficient_table(g, N, 1, transpose=True)
    Ap = coefficient(g, p, 1)
    lp = math.log(p)

    lineU = _KernelLine(weight, arch, sign, 2)
    Dn = _dirichlet_on_line(a, lineU.u)
    e1, e3 = np.exp(-lineU.u * lp) * Dn, np.exp(-3 * lineU.u * lp) * Dn
    profU = lineU.profile(lambda t: np.ones_like(t))
    u1, q1 = lineU.apply(profU, e1)
    u3, q3 = lineU.apply(profU, e3)
    total_a = Ap / (2 * math.sqrt(p)) * u1 - u3 / (2 * p ** 1.5)

    lineV = _KernelLine(weight, arch, sign, 1)
    profV = lineV.profile(lambda t: 3 * np.log(t))
    v1, r1 = lineV.apply(profV, e1)
    v3, r3 = lineV.apply(profV, e3)
    log_a = Ap / (2 * math.sqrt(p)) * v1 - v3 / (2 * p ** 1.5)
    const_a = total_a - log_a

    L = _l_value(g.dual(), 0, l_truncation)
    dL = _l_value(g.dual(), 1, l_truncation)
    I0 = weight_integral(T, M, False, whole_line=True)
    I1 = weight_integral(T, M, True, whole_line=True)
    K1 = derivative_constant(L.value, dL.value, p, 1)
    K2 = derivative_constant(L.value, dL.value, p, 3)
    den = 2 * p ** 1.5 * math.pi
    log_b = 3 * L.value * (Ap * p - 1) * I1 / den
    const_b = (Ap * p * K1 - K2) * I0 / den
    single_K = K1 * (Ap * p - 1) * I0 / den
    scale = abs(log_b) + abs(const_b)
    pieces = {
        "route_a_log": _real_if_close(log_a, scale),
        "route_a_const": _real_if_close(const_a, scale),
        "route_b_log": _real_if_close(log_b, scale),
        "route_b_const": _real_if_close(const_b, scale),
        "gap_log": abs(log_a - log_b),
        "gap_const": abs(const_a - const_b),
        "gap_total": abs(total_a - log_b - const_b),
        "K1": K1,
        "K2": K2,
        "const_single_K": _real_if_close(single_K, scale),
        "L_at_1": L.value,
        "dL_at_1": dL.value,
        "L_error": max(L.error, dL.error),
        "I": I0,
        "I_log": I1,
        "A_p": _real_if_close(Ap),
        "quadrature_error": (abs(Ap) * (q1 + r1)) / (2 * math.sqrt(p)) + (q3 + r3) / (2 * p ** 1.5),
        "m_truncation": N,
        "hecke_side": hecke_side,
    }
    return DerivativeDiagonal(
        _real_if_close(log_a, scale),
        _real_if_close(const_a, scale),
        (pieces["route_a_log"], pieces["route_a_const"]),
        (pieces["route_b_log"], pieces["route_b_const"]),
        pieces,
    )


# ---------------------------------------------------------------------------
# predictions
# ---------------------------------------------------------------------------


@dataclass
class MomentPrediction:
    """Predicted main terms with an error budget.

    error_budget = M^{-3} T^{5/2} p + M^{-1} T^{3/2} + M T^{1/7}: the shape of
    the error term with every epsilon-power set to 0 and every constant to 1.
    It is a reporting device, not a bound.
    """

    T: float
    M: float
    p: int
    main: float
    secondary: float
    error_budget: float
    pieces: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(_jsonable(asdict(self)), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def error_budget(T: float, M: float, p: int) -> float:
    return M ** -3 * T ** 2.5 * p + T ** 1.5 / M + M * T ** (1 / 7)


def predict_moment(f: GL3Coefficients, p: int, T: float, M: float, derivative: bool = False,
                   l_values: tuple | None = None, l_truncation: int = _L_TRUNCATION) -> MomentPrediction:
    """Main term of the twisted first moment (or of its derivative analogue).

    main = [L(1, f~)(A(p,1) p - 1) + L(1, f)(A(1,p) p - 1)] p^{-3/2} pi^{-1} int_0^inf k tanh(pi t) t dt.
    For p = 1 (no twist) the diagonal has a single sum and main is
    (L(1, f~) + L(1, f)) pi^{-1} int_0^inf k tanh(pi t) t dt.

    With ``derivative`` the main term is the log|t| part and ``secondary`` the
    constant part, both over the whole line.  ``l_values`` overrides the
    L-values: (L(1, f~), L(1, f)) or, for the derivative,
    (L(1, f~), L'(1, f~), L(1, f), L'(1, f)).
    """
    p = int(p)
    if p != 1:
        _check_prime(p)
    if not (T > 0 and M > 0):
        raise ValueError("need T > 0 and M > 0")
    fd = f.dual()
    Ap, A1p = coefficient(f, p, 1), coefficient(f, 1, p)

    def lv(g, order):
        return _l_value(g, order, l_truncation).value

    if l_values is None:
        # L(1, f~) = sum A(1, m)/m is the L-function of the dual form
        if derivative:
            l_values = (lv(fd, 0), lv(fd, 1), lv(f, 0), lv(f, 1))
        else:
            l_values = (lv(fd, 0), lv(f, 0))
    pieces = {"A_p1": _real_if_close(Ap), "A_1p": _real_if_close(A1p)}
    if not derivative:
        Lt, L = l_values
        W = weight_integral(T, M)
        if p == 1:
            direct, dual = Lt * W / math.pi, L * W / math.pi
        else:
            direct = Lt * (Ap * p - 1) / (p ** 1.5 * math.pi) * W
            dual = L * (A1p * p - 1) / (p ** 1.5 * math.pi) * W
        pieces.update(direct=_real_if_close(direct), dual=_real_if_close(dual), L_dual_form=Lt, L_form=L,
                      weight_integral=W)
        main, secondary = direct + dual, 0.0
    else:
        Lt, dLt, L, dL = l_values
        I0 = weight_integral(T, M, False, whole_line=True)
        I1 = weight_integral(T, M, True, whole_line=True)
        lp = math.log(p)
        den = 2 * p ** 1.5 * math.pi

        def parts(Lx, dLx, A):
            if p == 1:
                return 3 * Lx * I1 / (2 * math.pi), derivative_constant(Lx, dLx, 2, 0) * I0 / (2 * math.pi)
            K1 = 2 * dLx - 3 * Lx * math.log(2 * math.pi) - Lx * lp
            K2 = K1 - 2 * Lx * lp
            return 3 * Lx * (A * p - 1) * I1 / den, (A * p * K1 - K2) * I0 / den

        dlog, dconst = parts(Lt, dLt, Ap)
        ulog, uconst = parts(L, dL, A1p)
        pieces.update(direct_log=_real_if_close(dlog), direct_const=_real_if_close(dconst),
                      dual_log=_real_if_close(ulog), dual_const=_real_if_close(uconst),
                      L_dual_form=Lt, dL_dual_form=dLt, L_form=L, dL_form=dL, I=I0, I_log=I1)
        main, secondary = dlog + ulog, dconst + uconst
    return MomentPrediction(float(T), float(M), p, _real_if_close(main), _real_if_close(secondary),
                            error_budget(T, M, max(p, 1)), pieces)


def predictions_to_csv(preds: Sequence[MomentPrediction]) -> str:
    """Rows T,M,p,main,secondary,budget in input order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T", "M", "p", "main", "secondary", "budget"])
    for r in preds:
        w.writerow([repr(r.T), repr(r.M), r.p, repr(float(np.real(r.main))), repr(float(np.real(r.secondary))),
                    repr(r.error_budget)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# empirical side (diagnostic)
# ---------------------------------------------------------------------------


def _central_value(f: GL3Coefficients, lam: np.ndarray, t: float, y_cut: float) -> complex:
    """L(1/2, f x u) from the two-sided approximate functional equation (root number 1).

    sum_{m^2 n <= y_cut} lambda(n) [A(n,m) V_-(m^2 n, t) + A(m,n) V_+(m^2 n, t)] / sqrt(m^2 n)
    """
    out = 0j
    n_max = len(lam)
    for sign, transpose in (("minus", False), ("plus", True)):
        kind = GammaFactorKind(sign, f.arch if f.arch is not None else LanglandsParams())
        m = 1
        while m * m <= y_cut:
            nn = min(n_max, int(y_cut // (m * m)))
            A = coefficient_table(f, nn, m, transpose=transpose)
            y = (m * m) * np.arange(1, nn + 1, dtype=float)
            V = afe_transform_V(y, t, kind)
            out += np.sum(lam[:nn] * A * V / np.sqrt(y))
            m += 1
    return out


def _eisenstein_lambda(n_max: int, t: float) -> np.ndarray:
    return np.array([eta(n, 0.5 + 1j * t) for n in range(1, n_max + 1)])


def empirical_moment(f: GL3Coefficients, p: int, T: float, M: float, forms: Sequence[MaassFormRecord] = (),
                     derivative: bool = False, y_factor: float = 30.0, eis_nodes: int = 24) -> complex:
    """Diagnostic spectral side of the twisted moment at desk scale.

    sum_j k(t_j) omega_j lambda_j(p) L(1/2, f x u_j)
      + (1/4 pi) int k(t) omega(t) conj(eta(p, 1/2+it)) L(1/2+it, f) L(1/2-it, f) dt

    over even forms.  Central values come from the approximate functional
    equation cut at m^2 n <= y_factor (t/2 pi)^3, where V has dropped to a
    few percent, so the values are rough.  Raises CorpusInsufficientError
    when a form with non-negligible k(t_j) lacks coefficients up to that cut.
    The derivative variant is not available from these data.
    """
    if derivative:
        raise NotImplementedError("central derivatives need the root-number-aware AFE; not provided")
    p = _check_prime(p)
    w = SpectralWeight(T, M)
    total = 0j
    for rec in forms:
        if rec.parity != "even":
            continue
        kt = float(w(rec.t_j))
        if kt < 1e-12:
            continue
        y_cut = y_factor * (rec.t_j / (2 * math.pi)) ** 3
        if rec.n_max < min(y_cut, 1e12) or rec.n_max < p:
            raise CorpusInsufficientError(
                f"form t={rec.t_j:.6f} has {rec.n_max} coefficients, needs {int(math.ceil(y_cut))}")
        lam = rec.lam[: int(y_cut)]
        total += kt * rec.omega_j * rec.coefficient(p) * _central_value(f, lam, rec.t_j, y_cut)
    # continuous spectrum: Gauss-Legendre on the window, integrand even in t
    a, b = w.window
    x, wx = np.polynomial.legendre.leggauss(eis_nodes)
    cont = 0j
    for ti, wi in zip(0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * wx):
        ti = max(float(ti), 1e-6)
        y_cut = y_factor * (max(ti, 1.0) / (2 * math.pi)) ** 3
        lam = _eisenstein_lambda(int(y_cut), ti)
        val = _central_value(f, lam, ti, y_cut)
        cont += wi * float(w(ti)) * omega_eisenstein(ti) * np.conj(eta(p, 0.5 + 1j * ti)) * val
    # (1/4 pi) over the whole line = (1/2 pi) over the half line
    total += cont / (2 * math.pi)
    return _real_if_close(total)
