"""Vertical-line integral transforms and oscillatory integrals.

* V and U transforms of the approximate functional equation,
* the Voronoi transforms Psi^{+-}(x) as Mellin-Barnes integrals,
* the GL(3) Voronoi summation identity (with polar terms for Eisenstein
  coefficient systems),
* calibrated leading-order asymptotics of Psi^{+-},
* a stationary-phase evaluator checked against panel quadrature.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .arith import divisors, factorize, kloosterman, mobius, zeta
from .errors import (
    AccuracyError,
    CalibrationUnavailableError,
    PoleError,
    RangeError,
    TruncationError,
)
from .gl3 import GL3Coefficients, coefficient, eisenstein_coefficients
from .special_fn import (
    ArchimedeanData,
    GammaFactorKind,
    LanglandsParams,
    as_arch,
    e,
    gamma_ratio_afe,
    mollifier_F,
    voronoi_gamma_pm,
)

__all__ = [
    "ContourSpec",
    "OscIntegralResult",
    "TestFunction",
    "BumpFunction",
    "ZeroFunction",
    "vertical_integral",
    "afe_transform_V",
    "afe_transform_U",
    "mellin_transform",
    "mellin_on_line",
    "PsiTransform",
    "voronoi_Psi_exact",
    "voronoi_Psi_asymptotic",
    "CalibrationStore",
    "calibrate_voronoi_asymptotics",
    "VoronoiReport",
    "voronoi_identity_check",
    "eisenstein_polar_terms",
    "oscillatory_quad",
    "stationary_phase",
]


# ---------------------------------------------------------------------------
# vertical-line quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContourSpec:
    """Vertical line Re s = abscissa, cut at |Im s| <= height_cut.

    ``height_cut=None`` lets the caller size the cut from integrand decay.
    """

    abscissa: float = 1.0
    height_cut: float | None = 15.0
    nodes_per_unit: int = 20

    def __post_init__(self):
        if self.nodes_per_unit < 0:
            raise ValueError("nodes_per_unit must be positive (0 selects it automatically)")
        if self.height_cut is not None and not self.height_cut > 0:
            raise ValueError("height_cut must be positive")

    @property
    def step(self) -> float:
        return 1.0 / (self.nodes_per_unit or 20)


def vertical_integral(fn: Callable, contour: ContourSpec, tol: float = 1e-10):
    """(1/2 pi i) int_{(sigma)} fn(s) ds by the trapezoid rule.

    ``fn`` maps an array of s to an array of values (extra trailing axes are
    allowed).  Returns (value, error_estimate) where the error comes from
    comparing against the rule with every other node dropped.
    """
    H = contour.height_cut if contour.height_cut is not None else 15.0
    h = contour.step
    n = int(math.ceil(H / h))
    tau = np.arange(-n, n + 1) * h
    vals = np.asarray(fn(contour.abscissa + 1j * tau))
    # ds = i dtau, and (1/2 pi i) * i = 1/(2 pi)
    full = h * vals.sum(axis=0) / (2 * math.pi)
    half = 2 * h * vals[(n % 2) :: 2].sum(axis=0) / (2 * math.pi)
    edge = np.abs(vals[[0, -1]]).max(axis=0) * H
    err = np.abs(full - half) + edge
    return full, err


def _afe_integrand(y, t, kind, A, power):
    ly = np.log(np.atleast_1d(np.asarray(y, dtype=float)))

    def fn(u):
        r = gamma_ratio_afe(u, t, kind) * mollifier_F(u, A) / u ** power
        return np.exp(-np.outer(u, ly)) * r[:, None]

    return fn


def _afe_transform(y, t, kind, contour, A, tol, power):
    if contour is None:
        # |y^{-u} gamma ratio| grows like t^{3 sigma}; keep it O(1) to avoid cancellation
        contour = ContourSpec(min(1.0, 1.0 / math.log(max(abs(t), math.e))), 15.0, 0)
    if contour.nodes_per_unit == 0:
        # trapezoid error ~ exp(-2 pi sigma / h) with the pole at u = 0 at distance sigma
        npu = max(20, int(math.ceil(10.0 / contour.abscissa)))
        contour = ContourSpec(contour.abscissa, contour.height_cut, npu)
    sig = contour.abscissa
    if not 0 < sig < A / 2:
        raise PoleError(f"abscissa {sig} outside the pole-free strip (0, {A / 2})")
    if not isinstance(kind, GammaFactorKind):
        kind = GammaFactorKind(*kind) if isinstance(kind, tuple) else GammaFactorKind(kind)
    arch = as_arch(kind.params)
    if -0.5 - sig - min(k.real for k in arch.gamma_r_shifts() + arch.dual().gamma_r_shifts()) >= 0:
        raise PoleError("contour crosses a gamma pole")
    val, err = vertical_integral(_afe_integrand(y, t, kind, A, power), contour, tol)
    scale = np.maximum(1.0, np.abs(val))
    if np.any(err > tol * scale):
        raise AccuracyError("vertical quadrature tolerance not met", value=val, error=err)
    out = val if np.ndim(y) else complex(val[0])
    return out


def afe_transform_V(y, t: float, kind=None, contour: ContourSpec | None = None, A: int = 16, tol: float = 1e-9):
    """V(y, t) = (1/2 pi i) int y^{-u} F(u) gamma(1/2+u, t)/gamma_-(1/2, t) du/u.

    ``y`` may be an array.  Needs 0 < abscissa < A/2.
    """
    kind = kind or GammaFactorKind()
    return _afe_transform(y, t, kind, contour, A, tol, 1)


def afe_transform_U(y, t: float, kind=None, contour: ContourSpec | None = None, A: int = 16, tol: float = 1e-9):
    """U(y, t): the V integrand with du/u^2 (double pole at u = 0)."""
    kind = kind or GammaFactorKind()
    return _afe_transform(y, t, kind, contour, A, tol, 2)


# ---------------------------------------------------------------------------
# test functions and Mellin transforms
# ---------------------------------------------------------------------------


class TestFunction:
    """Smooth function with compact support [lo, hi] inside (0, inf)."""

    __test__ = False  # not a pytest class

    def __init__(self, fn: Callable, support: tuple, key: str | None = None, freq: float = 0.0):
        lo, hi = float(support[0]), float(support[1])
        if not 0 < lo < hi:
            raise ValueError("support must be an interval inside (0, inf)")
        self._fn = fn
        self.support = (lo, hi)
        self.key = key or f"fn@{id(fn)}"
        # rough size of the log-frequency content beyond the envelope (for grid sizing)
        self.freq = float(freq)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=complex)
        m = (y > self.support[0]) & (y < self.support[1])
        if np.any(m):
            out[m] = self._fn(y[m])
        return out

    @property
    def is_zero(self) -> bool:
        return False


class ZeroFunction(TestFunction):
    """psi = 0."""

    def __init__(self, support=(1.0, 2.0)):
        super().__init__(lambda y: np.zeros_like(y), support, key="zero")

    @property
    def is_zero(self) -> bool:
        return True


class BumpFunction(TestFunction):
    """exp(a - a/(1 - u^2)) with u = 2(y - 1.5X)/X, supported on [X, 2X].

    ``sharpness`` is a; a = 1 is the standard bump.  Larger a concentrates
    the mass and makes the Mellin transform decay faster along vertical
    lines.  ``modulation=(x, s)`` multiplies by e(3 s (x y)^{1/3}), which
    makes one of the two oscillatory terms of Psi(x) non-oscillatory.
    """

    def __init__(self, X: float, sharpness: float = 1.0, modulation: tuple | None = None):
        self.X = float(X)
        self.sharpness = float(sharpness)
        self.modulation = modulation
        a = self.sharpness
        X = self.X

        def fn(y):
            u = 2 * (y - 1.5 * X) / X
            out = np.exp(a - a / (1 - u * u)).astype(complex)
            if modulation is not None:
                xm, sg = modulation
                out = out * e(3 * sg * np.cbrt(xm * y))
            return out

        freq = 0.0
        key = f"bump(X={X:.12g},a={a:.12g})"
        if modulation is not None:
            freq = 2 * math.pi * (2 * modulation[0] * X) ** (1 / 3)
            key += f"*e({3 * modulation[1]:+d}(x y)^1/3,x={modulation[0]:.12g})"
        super().__init__(fn, (X, 2 * X), key=key, freq=freq)


def _log_grid(testfn: TestFunction, tau_max: float):
    lo, hi = testfn.support
    L = math.log(hi / lo)
    nv = int(max(2048, 3.0 * (tau_max + testfn.freq) * L))
    v = np.linspace(math.log(lo), math.log(hi), nv)
    return v, v[1] - v[0]


def mellin_transform(testfn: TestFunction, s, tau_hint: float | None = None):
    """psi~(s) = int psi(y) y^{s-1} dy (trapezoid in log y; psi vanishes to all orders at the ends)."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    tmax = tau_hint if tau_hint is not None else float(np.abs(s.imag).max())
    v, dv = _log_grid(testfn, tmax)
    w = testfn(np.exp(v)) * dv
    out = np.empty(s.shape, dtype=complex)
    step = 2048
    for i in range(0, len(s), step):
        out[i : i + step] = np.exp(np.outer(s[i : i + step], v)) @ w
    return out


def mellin_on_line(testfn: TestFunction, sigma: float, h: float, n: int) -> np.ndarray:
    """psi~(-sigma - i k h) for k = -n..n, by one FFT of psi(e^v) e^{-sigma v}.

    The v-grid spacing is chosen so that the padded period is exactly 2 pi/h
    and the grid resolves frequencies well beyond n h.
    """
    lo, hi = testfn.support
    v0, L = math.log(lo), math.log(hi / lo)
    period = 2 * math.pi / h
    dv_max = min(L / 2048, math.pi / (3.0 * (n * h + testfn.freq) + 1.0))
    N = 1 << int(math.ceil(math.log2(max(period / dv_max, 2 * n + 2))))
    dv = period / N
    nv = int(L / dv) + 1
    if nv > N:
        raise RangeError("Mellin grid does not fit inside one period")
    v = v0 + dv * np.arange(nv)
    g = np.zeros(N, dtype=complex)
    g[:nv] = testfn(np.exp(v)) * np.exp(-sigma * v)
    F = np.fft.fft(g) * dv
    k = np.arange(-n, n + 1)
    return np.exp(-1j * k * h * v0) * F[k % N]


# ---------------------------------------------------------------------------
# Voronoi transforms
# ---------------------------------------------------------------------------


def _legal_abscissa_min(arch: ArchimedeanData) -> float:
    """Psi^{+-} needs sigma > max(-1 - Re kappa) over the dual Gamma_R shifts of both sign twists."""
    shifts = arch.dual().gamma_r_shifts() + arch.twist_sign().dual().gamma_r_shifts()
    return max(-1.0 - k.real for k in shifts)


class PsiTransform:
    """Psi^{+-}(x) = (1/2 pi i) int_{(sigma)} x^{-s} gamma^{+-}(s) psi~(-s) ds.

    The integrand is tabulated once on a tau-grid; evaluation at many x is a
    matrix-vector product.  The height cut grows until the tabulated
    integrand falls below ``rel_cut`` of its peak.
    """

    def __init__(self, params, testfn: TestFunction, sign: int, contour: ContourSpec | None = None,
                 rel_cut: float = 1e-15, max_height: float = 12000.0):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.arch = as_arch(params)
        self.testfn = testfn
        self.sign = sign
        lo = _legal_abscissa_min(self.arch)
        if contour is None:
            contour = ContourSpec(max(lo + 0.5, -0.5), None, 0)
        if contour.abscissa <= lo:
            raise PoleError(f"abscissa {contour.abscissa} must exceed {lo}")
        if contour.nodes_per_unit == 0:
            # trapezoid error ~ exp(-2 pi d / h) with d the distance to the nearest pole
            d = min(contour.abscissa - lo, 1.0)
            contour = ContourSpec(contour.abscissa, contour.height_cut, int(math.ceil(40.0 / (2 * math.pi * d))))
        self.contour = contour
        sig = contour.abscissa
        h = contour.step
        if testfn.is_zero:
            self.tau = np.zeros(1)
            self.weights = np.zeros(1, dtype=complex)
            self.error = 0.0
            return
        H = contour.height_cut or max(100.0, 1.5 * testfn.freq + 100.0)
        last_edge = math.inf
        while True:
            n = int(math.ceil(H / h))
            tau = np.arange(-n, n + 1) * h
            s = sig + 1j * tau
            g = voronoi_gamma_pm(s, sign, self.arch)
            mt = mellin_on_line(testfn, sig, h, n)
            vals = g * mt
            if not np.all(np.isfinite(vals)):
                raise AccuracyError("non-finite Psi integrand on the contour")
            peak = np.abs(vals).max()
            k = max(1, int(5 / h))
            edge = max(np.abs(vals[:k]).max(), np.abs(vals[-k:]).max())
            # FFT values bottom out near rounding level relative to the transform's size
            gedge = max(np.abs(g[:k]).max(), np.abs(g[-k:]).max())
            floor = 1e-14 * np.abs(mt).max() * gedge
            if (contour.height_cut is not None or edge <= max(rel_cut * peak, floor)
                    or H >= max_height or (edge < 1e-8 * peak and edge > 0.5 * last_edge)):
                break
            last_edge = edge
            H *= 1.5
        self.height = H
        self.tau = tau
        self.weights = vals * h / (2 * math.pi)
        self.peak = peak
        self.edge = edge
        # the trapezoid rule converges geometrically in 1/h, so the doubled-step
        # discrepancy d predicts an error of about d^2 / (sum of |weights|) for step h
        scale = float(np.abs(self.weights).sum())
        d = abs(self.weights.sum() - 2 * self.weights[(n % 2) :: 2].sum())
        self.error = float(d * d / max(scale, 1e-300) + edge * h * 10 / (2 * math.pi))

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x <= 0):
            raise ValueError("x must be positive")
        if len(x) > 256 and len(self.tau) > 1:
            return self._interpolated(x)
        lx = np.log(x)
        out = np.empty(x.shape, dtype=complex)
        step = max(1, 4_000_000 // max(len(self.tau), 1))
        for i in range(0, len(x), step):
            blk = lx[i : i + step]
            out[i : i + step] = np.exp(-np.outer(blk, self.contour.abscissa + 1j * self.tau)) @ self.weights
        return out

    _INTERP_ORDER = 10

    def _interpolated(self, x):
        """Band-limited evaluation: one FFT onto a fine log x grid, then local Lagrange interpolation."""
        lx = np.log(x)
        h = self.tau[1] - self.tau[0]
        n = (len(self.tau) - 1) // 2
        N = 1 << 20
        while N < 8 * len(self.tau):
            N <<= 1
        dl = 2 * math.pi / (N * h)
        p = self._INTERP_ORDER
        l0 = lx.min() - (p + 2) * dl
        if lx.max() + (p + 2) * dl - l0 >= N * dl:
            raise RangeError("x range too wide for one FFT period")
        k = np.arange(-n, n + 1)
        buf = np.zeros(N, dtype=complex)
        buf[k % N] = self.weights * np.exp(-1j * k * h * l0)
        grid = np.fft.fft(buf)  # grid[j] = sum_k w_k e^{-i tau_k (l0 + j dl)}
        pos = (lx - l0) / dl
        j0 = np.floor(pos).astype(np.int64) - p // 2 + 1
        frac = pos - j0
        val = np.zeros(len(x), dtype=complex)
        for a in range(p):
            w = np.ones(len(x))
            for b in range(p):
                if b != a:
                    w *= (frac - b) / (a - b)
            val += w * grid[j0 + a]
        return np.exp(-self.contour.abscissa * lx) * val


_PSI_CACHE: dict = {}


def _psi_transform(params, testfn, sign, contour=None) -> PsiTransform:
    arch = as_arch(params)
    key = (arch.key(), testfn.key, sign, contour)
    pt = _PSI_CACHE.get(key)
    if pt is None:
        pt = PsiTransform(arch, testfn, sign, contour)
        if len(_PSI_CACHE) > 64:
            _PSI_CACHE.clear()
        _PSI_CACHE[key] = pt
    return pt


def voronoi_Psi_exact(x, params, testfn: TestFunction, sign: int, contour: ContourSpec | None = None):
    """Psi^{+-}(x) by the Mellin-Barnes integral; ``x`` may be an array."""
    pt = _psi_transform(params, testfn, sign, contour)
    out = pt(x)
    return out if np.ndim(x) else complex(out[0])


# ---------------------------------------------------------------------------
# oscillatory quadrature and stationary phase
# ---------------------------------------------------------------------------


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _panel_edges(dphase, a, b, cycles):
    """Edges such that each panel carries at most ``cycles`` oscillations."""
    grid = np.linspace(a, b, 4097)
    rate = np.abs(dphase(grid)) + 1e-300
    dens = np.maximum(rate / cycles, 8.0 / (b - a))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    n = int(math.ceil(cum[-1])) + 1
    return np.interp(np.linspace(0, cum[-1], n + 1), cum, grid)


def _panel_sum(f, edges):
    a, b = edges[:-1], edges[1:]
    mid, half = (a + b) / 2, (b - a) / 2
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    return np.sum(f(pts.ravel()).reshape(pts.shape) * _GL_W[None, :] * half[:, None])


def oscillatory_quad(amp: Callable, phase: Callable, dphase: Callable, a: float, b: float,
                     tol: float = 1e-10, breakpoints=()):
    """int_a^b amp(y) e(phase(y)) dy by Gauss-Legendre panels.

    Panels hold a bounded number of phase cycles and are refined until two
    successive resolutions agree.  Returns (value, error_estimate).
    """
    pts = sorted({a, b, *[p for p in breakpoints if a < p < b]})

    def f(y):
        return amp(y) * e(phase(y))

    prev = None
    for cycles in (0.5, 0.25, 0.125, 0.0625):
        total = 0.0 + 0.0j
        for lo, hi in zip(pts[:-1], pts[1:]):
            total += _panel_sum(f, _panel_edges(dphase, lo, hi, cycles))
        if prev is not None:
            err = abs(total - prev)
            if err <= tol * max(1.0, abs(total)):
                return complex(total), float(err)
        prev = total
    raise AccuracyError("oscillatory quadrature did not converge", value=complex(total), error=float(err))


@dataclass
class OscIntegralResult:
    value: complex
    error_estimate: float
    stationary_points: list = field(default_factory=list)
    method: str = "direct_quadrature"
    direct_value: complex | None = None

    def __post_init__(self):
        if self.method not in ("direct_quadrature", "stationary_phase", "no_stationary_negligible"):
            raise ValueError(f"unknown method {self.method}")


def _num_deriv(f, y, h):
    return (f(y + h) - f(y - h)) / (2 * h)


def _as_phase_triple(phase):
    if isinstance(phase, (tuple, list)):
        if len(phase) != 3:
            raise ValueError("phase must be (phi, dphi, d2phi)")
        return phase
    raise TypeError("phase must be given with its first two derivatives as (phi, dphi, d2phi)")


def stationary_phase(phase, amplitude: Callable, support: tuple, tol: float = 1e-2,
                     degenerate_tol: float = 1e-12, validate: bool = False) -> OscIntegralResult:
    """Evaluate int a(y) e(phi(y)) dy over ``support`` by stationary phase.

    ``phase`` is (phi, phi', phi'').  Stationary points y0 contribute
    a(y0) e(phi(y0) + sgn(phi''(y0))/8) / sqrt|phi''(y0)|.  The error estimate
    combines the next term of the expansion with endpoint terms.  Without
    stationary points a two-step integration-by-parts (first derivative test)
    bound is returned; the integral is reported as negligible when that
    bound is below ``tol`` times int |a|.
    """
    phi, dphi, d2phi = _as_phase_triple(phase)
    a0, b0 = float(support[0]), float(support[1])
    if not a0 < b0:
        raise ValueError("support must be an interval")
    grid = np.linspace(a0, b0, 20001)
    d1 = dphi(grid)
    amp_grid = amplitude(grid)
    mass = float(np.trapezoid(np.abs(amp_grid), grid))
    roots = []
    sgn = np.sign(d1)
    for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        roots.append(optimize.brentq(dphi, grid[i], grid[i + 1], xtol=1e-14 * max(1.0, abs(grid[i])), rtol=1e-15))
    roots.extend(float(g) for g in grid[d1 == 0])
    roots = sorted(set(roots))

    def direct():
        return oscillatory_quad(amplitude, phi, dphi, a0, b0, tol=1e-10, breakpoints=roots)

    if not roots:
        # integrate by parts twice: int a e(phi) = [a e(phi)/(2 pi i phi')] - int (a/phi')' e(phi)/(2 pi i)
        g1 = amp_grid / d1
        dg1 = np.gradient(g1, grid)
        g2 = dg1 / d1
        dg2 = np.gradient(g2, grid)
        bound = (abs(g1[0]) + abs(g1[-1])) / (2 * math.pi)
        bound += (abs(g2[0]) + abs(g2[-1])) / (4 * math.pi ** 2)
        bound += float(np.trapezoid(np.abs(dg2), grid)) / (4 * math.pi ** 2)
        res = OscIntegralResult(0.0 + 0.0j, bound, [], "no_stationary_negligible")
        if bound > tol * max(mass, 1e-300):
            val, err = direct()
            res = OscIntegralResult(val, err, [], "direct_quadrature")
        elif validate:
            res.direct_value = direct()[0]
        return res
    main = 0.0 + 0.0j
    err = 0.0
    for y0 in roots:
        p2 = float(d2phi(y0))
        if abs(p2) < degenerate_tol:
            raise ArithmeticError(f"degenerate stationary point at y={y0} (phi''={p2})")
        s2 = 1.0 if p2 > 0 else -1.0
        lead = amplitude(np.array([y0]))[0] * e(phi(y0) + s2 / 8) / math.sqrt(abs(p2))
        main += lead
        # next-order term: (i/(4 pi phi'')) * (a'' - a' phi'''/phi'' - a phi''''/(4 phi'') + 5 a phi'''^2/(12 phi''^2))
        hstep = 1e-3 * max(1e-8, min(abs(y0 - a0), abs(b0 - y0), 1.0 / math.sqrt(abs(p2)), abs(y0) + 1e-8))
        p3 = float(_num_deriv(d2phi, y0, hstep))
        p4 = float((d2phi(y0 + hstep) - 2 * p2 + d2phi(y0 - hstep)) / hstep ** 2)
        am = lambda y: amplitude(np.atleast_1d(y))[0]
        av = am(y0)
        a1 = (am(y0 + hstep) - am(y0 - hstep)) / (2 * hstep)
        a2 = (am(y0 + hstep) - 2 * av + am(y0 - hstep)) / hstep ** 2
        corr = (a2 - a1 * p3 / p2 - av * p4 / (4 * p2) + 5 * av * p3 ** 2 / (12 * p2 ** 2)) / (4 * math.pi * abs(p2))
        err += 2.0 * abs(corr) / math.sqrt(abs(p2))
    for yb in (a0, b0):
        ab = abs(amplitude(np.array([yb]))[0])
        if ab > 0:
            err += ab / (2 * math.pi * max(abs(dphi(yb)), 1e-300))
    res = OscIntegralResult(complex(main), float(err), roots, "stationary_phase")
    if validate:
        res.direct_value = direct()[0]
    return res


# ---------------------------------------------------------------------------
# asymptotics of Psi and calibration
# ---------------------------------------------------------------------------


def _params_hash(params) -> str:
    import hashlib

    return hashlib.sha256(as_arch(params).key().encode()).hexdigest()[:16]


class CalibrationStore:
    """JSON store of fitted constants keyed by (params-hash, sign, j).

    With a path, writes go through a temporary file and an atomic rename.
    """

    version = 1

    def __init__(self, path: str | None = None):
        self.path = path
        self.data: dict = {}
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
            self.data = doc.get("constants", {})

    @staticmethod
    def key(params, sign: int, j: int) -> str:
        return f"{_params_hash(params)}|{'+' if sign > 0 else '-'}|{j}"

    def get(self, params, sign: int, j: int) -> dict:
        k = self.key(params, sign, j)
        if k not in self.data:
            raise CalibrationUnavailableError(f"no fitted constants for {as_arch(params).key()} sign={sign} j={j}")
        return self.data[k]

    def put(self, params, sign: int, j: int, c: complex, d: complex, residual: float):
        self.data[self.key(params, sign, j)] = {
            "c": [c.real, c.imag],
            "d": [d.real, d.imag],
            "residual": float(residual),
            "params": as_arch(params).key(),
        }

    def save(self):
        if not self.path:
            return
        doc = {"version": self.version, "constants": self.data}
        d = os.path.dirname(os.path.abspath(self.path))
        os.makedirs(d, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".calib.")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
        os.replace(tmp, self.path)

    def constants(self, params, sign: int, j: int):
        r = self.get(params, sign, j)
        return complex(*r["c"]), complex(*r["d"])


_DEFAULT_STORE = CalibrationStore()


def _asymptotic_basis(x: float, testfn: TestFunction, j: int):
    """(x int psi e(+3(xy)^1/3)(xy)^{-j/3} dy, same with e(-...))."""
    lo, hi = testfn.support
    out = []
    for sg in (1, -1):
        amp = lambda y, sg=sg: testfn(y) * (x * y) ** (-j / 3.0)
        ph = lambda y, sg=sg: sg * 3.0 * np.cbrt(x * y)
        dph = lambda y, sg=sg: sg * np.cbrt(x) * np.power(y, -2.0 / 3.0)
        # the test function may itself oscillate; add its phase rate to size panels
        rate = lambda y, dph=dph: np.abs(dph(y)) + testfn.freq / (2 * math.pi * np.maximum(y, 1e-300))
        val, _ = oscillatory_quad(amp, ph, rate, lo, hi, tol=1e-11)
        out.append(x * val)
    return out


def voronoi_Psi_asymptotic(x, params, testfn: TestFunction, sign: int, K: int = 1,
                           store: CalibrationStore | None = None):
    """Leading terms x int psi(y) sum_{j<=K} [c_j e(3(xy)^1/3) + d_j e(-3(xy)^1/3)] (xy)^{-j/3} dy."""
    if K < 1:
        raise ValueError("K must be at least 1")
    store = store or _DEFAULT_STORE
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if testfn.is_zero:
        out = np.zeros(xs.shape, dtype=complex)
        return out if np.ndim(x) else 0j
    consts = [store.constants(params, sign, j) for j in range(1, K + 1)]
    if np.any(xs * testfn.support[0] < 10):
        raise RangeError("asymptotic regime needs x X >= 10")
    out = np.empty(xs.shape, dtype=complex)
    for i, xv in enumerate(xs):
        tot = 0j
        for j, (c, d) in enumerate(consts, start=1):
            bp, bm = _asymptotic_basis(xv, testfn, j)
            tot += c * bp + d * bm
        out[i] = tot
    return out if np.ndim(x) else complex(out[0])


def calibrate_voronoi_asymptotics(params, sign: int, X: float = 10.0, xX_grid=None, J: int = 2,
                                  store: CalibrationStore | None = None, sharpness: float = 1.0):
    """Least-squares fit of c_j, d_j (j <= J) against exact Psi values.

    For each x on the grid the bump on [X, 2X] is modulated by
    e(-+3(xy)^{1/3}) so that the c- and d-terms in turn become
    non-oscillatory and well conditioned.  Returns the relative residual.
    """
    store = store or _DEFAULT_STORE
    if xX_grid is None:
        xX_grid = np.logspace(3.5, 6.5, 13)
    rows, rhs = [], []
    for xX in xX_grid:
        x = float(xX) / X
        for mod in (-1, 1):
            tf = BumpFunction(X, sharpness, modulation=(x, mod))
            ex = voronoi_Psi_exact(x, params, tf, sign)
            row = []
            for j in range(1, J + 1):
                bp, bm = _asymptotic_basis(x, tf, j)
                row.extend([bp, bm])
            scale = abs(ex) or 1.0
            rows.append(np.array(row) / scale)
            rhs.append(ex / scale)
    A = np.array(rows)
    b = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.linalg.norm(A @ sol - b) / np.linalg.norm(b))
    for j in range(1, J + 1):
        store.put(params, sign, j, complex(sol[2 * j - 2]), complex(sol[2 * j - 1]), resid)
    store.save()
    return resid


# ---------------------------------------------------------------------------
# Voronoi summation identity
# ---------------------------------------------------------------------------


@dataclass
class VoronoiReport:
    lhs: complex
    rhs: complex
    dual_sum: complex
    polar: complex
    tail_bound: float
    truncation: int
    tolerance: float
    passed: bool
    regularization: str = "none"

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("lhs", "rhs", "dual_sum", "polar"):
            z = complex(d[k])
            d[k] = [z.real, z.imag]
        return d


def _g_c(c: int, u: complex, v: complex) -> complex:
    """sum over c | b e of b^{-u} e^{-v}, continued: zeta(u) zeta(v) sum_{g|c} (c/g)^{-v} g^{-u} prod_{p | c/g}(1 - p^{-u})."""
    tot = 0j
    for g in divisors(c):
        term = (c / g) ** (-v) * g ** (-u)
        for p in factorize(c // g) if c // g > 1 else {}:
            term *= 1 - p ** (-u)
        tot += term
    return complex(zeta(u) * zeta(v) * tot)


def eisenstein_polar_terms(params: LanglandsParams, m: int, c: int, d: int, testfn: TestFunction) -> complex:
    """Sum of residues of psi~(s) sum_n A(n, m) e(nd/c) n^{-s} at s = 1 + alpha_j.

    Needs pairwise distinct parameters.  Uses
    A(n, m) = sum_{delta | (n, m)} mu(delta) A(n/delta, 1) A(1, m/delta)
    and, for (h, c) = 1, Res_{s = 1 + a} sum_n A(n,1) e(nh/c) n^{-s}
    = G_c(1 + a - b, 1 + a - g) with G_c the sum over c | b e.
    """
    al = params.as_tuple()
    for i in range(3):
        for j in range(i + 1, 3):
            if abs(al[i] - al[j]) < 1e-9:
                raise PoleError("coincident parameters give higher-order poles; regularize first")
    f = eisenstein_coefficients(params)
    tot = 0j
    for j in range(3):
        a = al[j]
        others = [al[k] for k in range(3) if k != j]
        s0 = 1 + a
        res = 0j
        for delta in divisors(m):
            mu = mobius(delta)
            if mu == 0:
                continue
            cp = c // math.gcd(c, delta)
            res += mu * coefficient(f, 1, m // delta) * delta ** (-s0) * _g_c(cp, 1 + a - others[0], 1 + a - others[1])
        tot += mellin_transform(testfn, np.array([s0]))[0] * res
    return complex(tot)


def _kloosterman_row(a: int, sign: int, q: int, n2: np.ndarray) -> np.ndarray:
    """S(a, sign n2; q) for an array of n2 (depends on n2 mod q only)."""
    table = np.array([kloosterman(a, sign * r, q) for r in range(q)])
    return table[n2 % q]


def _dual_terms(f: GL3Coefficients, arch, m: int, c: int, dbar: int, testfn: TestFunction, n_lo: int, n_hi: int):
    """Terms of the dual side for n2 in (n_lo, n_hi], summed over n1 and +-."""
    total = np.zeros(n_hi - n_lo, dtype=complex)
    n2 = np.arange(n_lo + 1, n_hi + 1)
    for n1 in divisors(c * m):
        q = m * c // n1
        x = n2 * n1 ** 2 / (c ** 3 * m)
        A = f.column(n1, n_hi)[n_lo:]
        for sign in (1, -1):
            P = _psi_transform(arch, testfn, sign)(x)
            S = _kloosterman_row(m * dbar, sign, q, n2)
            total += c * A / (n1 * n2) * S * P
    return total


_MAX_TRUNCATION = 1 << 19


def _auto_truncation(arch, m, c, testfn, target):
    """Smallest n2 cut where the Psi envelope (times 1/n2) drops below ``target``."""
    lo = testfn.support[0]
    xs = np.logspace(-2, 7, 400) / lo
    env = np.zeros_like(xs)
    for sign in (1, -1):
        env = np.maximum(env, np.abs(_psi_transform(arch, testfn, sign)(xs)))
    # running max from the right so oscillation zeros do not cut early
    env = np.maximum.accumulate(env[::-1])[::-1]
    # |A| and |S| sizes: a divisor-type factor 10 and the modulus mc
    weight = 10.0 * env * c * (m * c) / np.maximum(xs * c ** 3 * m, 1.0)
    ok = np.nonzero(weight < target)[0]
    x_cut = xs[ok[0]] if len(ok) else xs[-1]
    return int(max(16, math.ceil(x_cut * c ** 3 * m)))


def _regularized_params(p: LanglandsParams, eps: float):
    """Perturbations p + eps z (1, w, w^2) whose average kills low orders in eps."""
    al = p.as_tuple()
    w = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
    v = (1.0, w, w * w)
    if max(abs(al[0] - al[1]), abs(al[1] - al[2])) < 1e-9 and abs(al[0]) < 1e-9:
        # symmetric functions of eps (1, w, w^2) only see eps^3, so +-eps leaves O(eps^6)
        roots = [1.0, -1.0]
    else:
        roots = [complex(math.cos(math.pi * k / 3), math.sin(math.pi * k / 3)) for k in range(6)]
    return [LanglandsParams(*(al[i] + eps * z * v[i] for i in range(3))) for z in roots]


def voronoi_identity_check(f: GL3Coefficients, m: int, c: int, d: int, testfn: TestFunction,
                           truncation: int | None = None, tol: float = 1e-6, eps: float = 1e-2) -> VoronoiReport:
    """Both sides of the GL(3) Voronoi summation formula.

    lhs = sum_n A(n, m) e(nd/c) psi(n).  rhs = dual sum over n1 | cm,
    n2 <= truncation with Kloosterman sums S(m dbar, +-n2; mc/n1) and
    Psi^{+-}(n2 n1^2/(c^3 m)), plus (for Eisenstein coefficients) the polar
    terms.  Coincident Eisenstein parameters are handled by averaging the
    right side over symmetric perturbations of size ``eps``.

    The tail bound is twice the absolute sum of the dual terms with
    truncation < n2 <= 2 truncation.  An automatic truncation is doubled
    until that bound fits; TruncationError is raised when it still exceeds
    max(tol |lhs|, tol).
    """
    if c < 1 or m < 1:
        raise ValueError("need c >= 1 and m >= 1")
    if math.gcd(c, d) != 1:
        raise ValueError("need (c, d) = 1")
    dbar = pow(d, -1, c) if c > 1 else 0
    lo, hi = testfn.support
    ns = np.arange(int(math.ceil(lo)), int(math.floor(hi)) + 1)
    if testfn.is_zero:
        return VoronoiReport(0j, 0j, 0j, 0j, 0.0, truncation or 0, tol, True)
    psi_n = testfn(ns.astype(float))
    lhs = complex(sum(coefficient(f, int(n), m) * e(n * d / c) * pv for n, pv in zip(ns, psi_n)))
    allowed = max(tol * abs(lhs), tol)
    systems = [(f, "none")]
    if f.eisenstein_params is not None:
        p = f.eisenstein_params
        al = p.as_tuple()
        if min(abs(al[0] - al[1]), abs(al[1] - al[2]), abs(al[0] - al[2])) < 1e-6:
            systems = [(eisenstein_coefficients(q), f"symmetric eps={eps:g}") for q in _regularized_params(p, eps)]
    if f.arch is None:
        raise ValueError("coefficient system has no archimedean data")
    adaptive = truncation is None
    if adaptive:
        truncation = _auto_truncation(systems[0][0].arch, m, c, testfn, 1e-3 * allowed)
    while True:
        dual = 0j
        polar = 0j
        tail = 0.0
        for g, _ in systems:
            terms = _dual_terms(g, g.arch, m, c, dbar, testfn, 0, 2 * truncation)
            dual += terms[:truncation].sum()
            tail += 2 * float(np.abs(terms[truncation:]).sum())
            if g.eisenstein_params is not None:
                polar += eisenstein_polar_terms(g.eisenstein_params, m, c, d, testfn)
        # the envelope guess ignores coefficient growth; widen until the measured tail fits
        if not adaptive or tail / len(systems) <= allowed or truncation >= _MAX_TRUNCATION:
            break
        truncation *= 2
    k = len(systems)
    dual, polar, tail = dual / k, polar / k, tail / k
    rhs = dual + polar
    rep = VoronoiReport(lhs, rhs, dual, polar, tail, truncation, tol, abs(lhs - rhs) <= max(tol * abs(lhs), tail),
                        systems[0][1])
    if tail > allowed:
        err = TruncationError(f"tail bound {tail:.3g} exceeds tolerance {allowed:.3g} at truncation {truncation}", tail)
        err.report = rep
        raise err
    return rep
