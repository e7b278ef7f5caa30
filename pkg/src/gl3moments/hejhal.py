"""Hecke-Maass cusp forms for SL(2, Z) by Hejhal's collocation method.

Used to build the vendored spectral corpus.  A form is written as

    v(z) = sum_{n != 0} lambda(n) sqrt(y) K_{ir}(2 pi |n| y) e(nx),

with lambda(-n) = +-lambda(n) for even/odd forms.  Automorphy is imposed by
sampling v on a horocycle below the fundamental domain and pulling the
points back.  K_{ir} is carried with the factor e^{pi r/2} so that it is
O(1) at the turning point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import AccuracyError
from .gl3 import MaassFormRecord

__all__ = ["ScaledK", "pullback", "hejhal_coefficients", "find_eigenvalues", "petersson_norm", "maass_form_record"]

_SQRT3_2 = math.sqrt(3.0) / 2


class ScaledK:
    """x -> e^{pi r/2} K_{ir}(x) on (x_min, inf), from the Bessel ODE in log x.

    Integrating towards small x follows the dominant solution, so the
    recessive-growth instability of upward recurrences does not arise.
    Start values come from the cosh integral at a point where it has no
    cancellation.
    """

    def __init__(self, r: float, x_min: float):
        self.r = float(r)
        x0 = 3.0 * self.r + 60.0
        self.x_top = x0
        k0, dk0 = self._integral(x0)
        u0, u1 = math.log(x0), math.log(x_min) - 0.01
        r2 = self.r * self.r

        def rhs(u, w):
            return [w[1], (math.exp(2 * u) - r2) * w[0]]

        sol = integrate.solve_ivp(rhs, (u0, u1), [k0, x0 * dk0], method="DOP853", rtol=1e-13, atol=1e-300,
                                  dense_output=True)
        if not sol.success:
            raise AccuracyError(f"K-Bessel ODE failed: {sol.message}")
        self._sol = sol.sol
        self.x_min = x_min

    def _integral(self, x):
        # e^{pi r/2} int_0^inf (1, -cosh u) e^{-x cosh u} cos(r u) du, trapezoid (analytic, even integrand)
        umax = math.acosh(1.0 + 800.0 / x)
        n = int(64 * umax * (self.r + x) + 2000)
        u = np.linspace(0.0, umax, n + 1)
        h = u[1] - u[0]
        base = np.exp(-x * np.cosh(u) + math.pi * self.r / 2) * np.cos(self.r * u)
        wts = np.full(n + 1, h)
        wts[0] = wts[-1] = h / 2
        return float(wts @ base), float(-(wts @ (base * np.cosh(u))))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x_min):
            raise ValueError("x below the tabulated range")
        out = np.zeros_like(x)
        inside = x <= self.x_top
        if np.any(inside):
            out[inside] = self._sol(np.log(x[inside]))[0]
        # beyond x_top the value is below e^{pi r/2 - 3r - 60}: negligible
        return out


def pullback(x, y):
    """Map points of the upper half plane into the standard fundamental domain."""
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    for _ in range(200):
        x = x - np.round(x)
        r2 = x * x + y * y
        inv = r2 < 1.0 - 1e-15
        if not np.any(inv):
            return x, y
        x[inv], y[inv] = -x[inv] / r2[inv], y[inv] / r2[inv]
    raise AccuracyError("pullback did not terminate")


def _trig(parity):
    return np.cos if parity == "even" else np.sin


def _system(r, parity, Y, M0, Q, kfun=None):
    kfun = kfun or ScaledK(r, 2 * math.pi * Y * 0.99)
    m = np.arange(1, Q + 1)
    xm = (m - 0.5) / (2 * Q)
    xs, ys = pullback(xm, np.full(Q, Y))
    n = np.arange(1, M0 + 1)
    trig = _trig(parity)
    # the mirror points x -> -x double the half-sum for both parities
    left = trig(2 * math.pi * np.outer(n, xm))  # (n, m)
    arg = 2 * math.pi * np.outer(ys, n)  # (m, l)
    right = np.sqrt(ys)[:, None] * kfun(arg.ravel()).reshape(arg.shape) * trig(2 * math.pi * np.outer(xs, n))
    V = (2.0 / (2 * Q)) * 2 * left @ right
    diag = math.sqrt(Y) * kfun(2 * math.pi * n * Y)
    return V - np.diag(diag)


def hejhal_coefficients(r: float, parity: str, Y: float, M0: int, Q: int | None = None, kfun=None):
    """lambda(1..M0) with lambda(1) = 1 at a trial spectral parameter r."""
    Q = Q or M0 + 10
    if Q <= M0:
        raise ValueError("need Q > M0 to avoid aliasing")
    A = _system(r, parity, Y, M0, Q, kfun)
    # drop the n = 1 equation, move the lambda(1) = 1 column to the right
    c = np.linalg.solve(A[1:, 1:], -A[1:, 0])
    return np.concatenate([[1.0], c])


def _search_size(r):
    Y = 0.40
    M0 = int(math.ceil((r + 40.0) / (2 * math.pi * Y * 0.95)))
    return Y, M0


def _defect(r, parity):
    """lambda(2) at two horocycle heights; eigenvalues are common zeros of the differences."""
    Y, M0 = _search_size(r)
    kf = ScaledK(r, 2 * math.pi * Y * 0.95 * 0.99)
    a = hejhal_coefficients(r, parity, Y, M0, kfun=kf)
    b = hejhal_coefficients(r, parity, 0.95 * Y, M0, kfun=kf)
    return a[1:4] - b[1:4]


def find_eigenvalues(parity: str, r_lo: float, r_hi: float, step: float = 0.01, tol: float = 1e-6):
    """Spectral parameters in [r_lo, r_hi] located by sign changes and refined with brentq."""
    grid = np.arange(r_lo, r_hi + step / 2, step)
    vals = np.array([_defect(r, parity) for r in grid])
    found = []
    for i in range(len(grid) - 1):
        if vals[i, 0] * vals[i + 1, 0] < 0:
            try:
                r0 = optimize.brentq(lambda r: _defect(r, parity)[0], grid[i], grid[i + 1], xtol=1e-13)
            except ValueError:
                continue
            d = _defect(r0, parity)
            if np.max(np.abs(d[1:])) < tol:
                found.append(r0)
    return found


def petersson_norm(r: float, parity: str, lam: np.ndarray, kfun=None) -> float:
    """int over the fundamental domain of |v|^2 dx dy / y^2 with e^{pi r/2}-scaled K."""
    kfun = kfun or ScaledK(r, 2 * math.pi * 0.5)
    N = len(lam)
    n = np.arange(1, N + 1)
    # y >= 1: the x-integral is 2 sum lambda(n)^2 y K(2 pi n y)^2
    gy, gw = np.polynomial.legendre.leggauss(80)
    tail = 0.0
    edges = [1.0, 1.5, 2.5, 4.0, 7.0, 12.0, 25.0]
    for a, b in zip(edges[:-1], edges[1:]):
        y = 0.5 * (b - a) * gy + 0.5 * (b + a)
        kk = kfun(2 * math.pi * np.outer(y, n))
        tail += 0.5 * (b - a) * np.sum(gw * 2 * (kk ** 2 @ lam ** 2) / y)
    # sqrt(3)/2 <= y <= 1 with sqrt(1 - y^2) <= |x| <= 1/2, doubled for x < 0
    y = 0.5 * (1 - _SQRT3_2) * gy + 0.5 * (1 + _SQRT3_2)
    box = 0.0
    trig = _trig(parity)
    for yi, wi in zip(y, gw):
        x0 = math.sqrt(max(0.0, 1 - yi * yi))
        x = 0.5 * (0.5 - x0) * gy + 0.5 * (0.5 + x0)
        v = 2 * math.sqrt(yi) * (trig(2 * math.pi * np.outer(x, n)) @ (lam * kfun(2 * math.pi * n * yi)))
        box += wi * 0.5 * (1 - _SQRT3_2) * 2 * 0.5 * (0.5 - x0) * np.sum(gw * v * v) / yi ** 2
    return float(tail + box)


def maass_form_record(r: float, parity: str, n_coeffs: int = 100) -> MaassFormRecord:
    """Refine coefficients on a low horocycle and attach the harmonic weight.

    omega = 4 pi |rho(1)|^2 / cosh(pi r) for the L^2-normalized form written
    with 2 sqrt(y) K; with the scaled K this is 2 pi / ((1 + e^{-2 pi r}) |v|^2).
    """
    Y = (r + 15.0) / (2 * math.pi * n_coeffs)
    M0 = int(math.ceil((r + 42.0) / (2 * math.pi * Y)))
    kf = ScaledK(r, 2 * math.pi * Y * 0.99)
    lam = hejhal_coefficients(r, parity, Y, M0, M0 + 20, kfun=kf)
    norm = petersson_norm(r, parity, lam[: min(len(lam), 60)], kfun=kf)
    omega = 2 * math.pi / ((1 + math.exp(-2 * math.pi * r)) * norm)
    return MaassFormRecord(float(r), parity, omega, lam[:n_coeffs])
