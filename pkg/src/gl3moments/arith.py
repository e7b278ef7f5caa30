"""Exponential sums and Eisenstein divisor data.

Kloosterman and Ramanujan sums, the twisted Kloosterman reduction that
collapses to Ramanujan sums, eta(n, s), the scattering data phi(s),
phi(n, s) and the continuous-spectrum weight omega(t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sps

from .errors import DivisibilityError, PoleError, RangeError
from .special_fn import ln_gamma

__all__ = [
    "KloostermanKey",
    "kloosterman",
    "kloosterman_complex",
    "ramanujan_sum",
    "twisted_kloosterman_reduction",
    "eta",
    "zeta",
    "eisenstein_phi",
    "eisenstein_phi_n",
    "omega_eisenstein",
    "mobius",
    "divisors",
    "num_divisors",
    "factorize",
    "primes_up_to",
    "is_prime",
    "mod_inverse_table",
]

KLOOSTERMAN_C_MAX = 10 ** 7


# ---------------------------------------------------------------------------
# elementary number theory
# ---------------------------------------------------------------------------

_SPF = np.zeros(2, dtype=np.int64)


def _spf_table(n: int) -> np.ndarray:
    """Smallest-prime-factor table covering 0..n (grown on demand)."""
    global _SPF
    if len(_SPF) > n:
        return _SPF
    size = max(n + 1, 2 * len(_SPF), 1 << 16)
    spf = np.arange(size, dtype=np.int64)
    for p in range(2, int(math.isqrt(size - 1)) + 1):
        if spf[p] == p:
            block = spf[p * p :: p]
            mask = block == np.arange(p * p, size, p)
            block[mask] = p
            spf[p * p :: p] = block
    _SPF = spf
    return spf


def factorize(n: int) -> dict:
    """Prime factorization {p: e} of a positive integer."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out: dict = {}
    if n < 1 << 24:
        spf = _spf_table(n)
        while n > 1:
            p = int(spf[n])
            out[p] = out.get(p, 0) + 1
            n //= p
        return out
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(n: int) -> bool:
    n = int(n)
    return n >= 2 and factorize(n) == {n: 1}


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    spf = _spf_table(n)
    idx = np.arange(2, n + 1)
    return idx[spf[2 : n + 1] == idx]


def divisors(n: int) -> list:
    divs = [1]
    for p, k in factorize(n).items():
        divs = [d * p ** j for d in divs for j in range(k + 1)]
    return sorted(divs)


def num_divisors(n: int) -> int:
    out = 1
    for k in factorize(n).values():
        out *= k + 1
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if any(k > 1 for k in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


# ---------------------------------------------------------------------------
# Kloosterman sums
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KloostermanKey:
    """(a, b, c) with a, b reduced modulo c >= 1."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        c = int(self.c)
        if c < 1:
            raise ValueError("modulus c must be >= 1")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", int(self.a) % c)
        object.__setattr__(self, "b", int(self.b) % c)


def _egcd_inverse(d: np.ndarray, c: int) -> np.ndarray:
    """Vectorized modular inverse of units d modulo c (extended Euclid)."""
    r0 = np.full(d.shape, c, dtype=np.int64)
    r1 = d.astype(np.int64) % c
    s0 = np.zeros(d.shape, dtype=np.int64)
    s1 = np.ones(d.shape, dtype=np.int64)
    active = r1 != 0
    while np.any(active):
        q = np.where(active, r0 // np.where(r1 == 0, 1, r1), 0)
        r0, r1 = np.where(active, r1, r0), np.where(active, r0 - q * r1, r1)
        s0, s1 = np.where(active, s1, s0), np.where(active, s0 - q * s1, s1)
        active = r1 != 0
    return s0 % c


@lru_cache(maxsize=4096)
def mod_inverse_table(c: int):
    """(units d in [0, c), their inverses) as int64 arrays."""
    if c == 1:
        return np.array([0], dtype=np.int64), np.array([0], dtype=np.int64)
    d = np.arange(1, c, dtype=np.int64)
    d = d[np.gcd(d, c) == 1]
    return d, _egcd_inverse(d, c)


def kloosterman_complex(a: int, b: int, c: int) -> complex:
    """S(a, b; c) as computed, before discarding the imaginary residue."""
    key = KloostermanKey(a, b, c)
    if key.c > KLOOSTERMAN_C_MAX:
        raise RangeError(f"modulus {key.c} exceeds supported range {KLOOSTERMAN_C_MAX}")
    d, dbar = mod_inverse_table(key.c)
    r = (d * key.a + dbar * key.b) % key.c
    ang = (2 * np.pi / key.c) * r
    return complex(np.sum(np.cos(ang)), np.sum(np.sin(ang)))


@lru_cache(maxsize=1 << 16)
def _kloosterman_cached(a: int, b: int, c: int) -> float:
    z = kloosterman_complex(a, b, c)
    if abs(z.imag) > 1e-9 * max(1.0, math.sqrt(c)):
        raise ArithmeticError(f"Kloosterman sum S({a},{b};{c}) has imaginary residue {z.imag}")
    return z.real


def kloosterman(key, b=None, c=None) -> float:
    """S(a, b; c) = sum over units d mod c of e((d a + dbar b)/c).

    Accepts a KloostermanKey or three integers.
    """
    if not isinstance(key, KloostermanKey):
        key = KloostermanKey(key, b, c)
    return _kloosterman_cached(key.a, key.b, key.c)


def ramanujan_sum(a: int, c: int) -> int:
    """c_c(a) = sum_{d | (a, c)} d mu(c/d)."""
    c = int(c)
    if c < 1:
        raise ValueError("c must be >= 1")
    g = math.gcd(int(a), c)
    return sum(d * mobius(c // d) for d in divisors(g))


def twisted_kloosterman_reduction(m: int, c: int, n1: int, n2: int, p: int, sign: int = 1):
    """Both sides of the identity that opens S(m dbar, +-n2; mc/n1) and sums over d.

    lhs = sum_{d mod c} e(p dbar / c) S(m dbar, +-n2; mc/n1)
    rhs = sum_{u mod mc/n1} e(+-n2 ubar / (mc/n1)) S(0, p + u n1; c)
    """
    m, c, n1, n2, p = (int(v) for v in (m, c, n1, n2, p))
    if (c * m) % n1:
        raise DivisibilityError(f"n1={n1} does not divide c*m={c * m}")
    sgn = 1 if sign > 0 else -1
    q = m * c // n1
    d, dbar = mod_inverse_table(c)
    lhs = 0.0 + 0.0j
    for db in dbar.tolist():
        lhs += complex(np.exp(2j * np.pi * ((p * db) % c) / c)) * kloosterman(m * db, sgn * n2, q)
    u, ubar = mod_inverse_table(q)
    rhs = 0.0 + 0.0j
    for uu, ub in zip(u.tolist(), ubar.tolist()):
        rhs += complex(np.exp(2j * np.pi * ((sgn * n2 * ub) % q) / q)) * ramanujan_sum(p + uu * n1, c)
    return lhs.real, rhs.real


# ---------------------------------------------------------------------------
# zeta and Eisenstein data
# ---------------------------------------------------------------------------

_B2K = np.array([float(sps.bernoulli(2 * k)[-1]) for k in range(1, 21)])
_FACT2K = np.array([math.factorial(2 * k) for k in range(1, 21)], dtype=float)


def zeta(s, n_terms: int | None = None):
    """Riemann zeta by Euler-Maclaurin with 20 correction terms; |Im s| <= 1e4."""
    s = np.asarray(s, dtype=complex)
    if np.any(np.abs(s.imag) > 1e4):
        raise RangeError("zeta supports |Im s| <= 1e4")
    if np.any(np.abs(s - 1) < 1e-14):
        raise PoleError("zeta has a pole at s = 1")
    flat = s.ravel()
    out = np.empty_like(flat)
    for i, si in enumerate(flat):
        if si.real < 0.5:
            # functional equation keeps Euler-Maclaurin in its comfortable half-plane
            out[i] = _zeta_reflect(si)
        else:
            out[i] = _zeta_em(si, n_terms)
    return out.reshape(s.shape) if s.ndim else complex(out[0])


def _zeta_em(s: complex, n_terms=None) -> complex:
    N = n_terms or int(max(20, abs(s) / math.pi + 20))
    n = np.arange(1, N, dtype=float)
    head = np.sum(np.exp(-s * np.log(n)))
    lN = math.log(N)
    tail = np.exp((1 - s) * lN) / (s - 1) + 0.5 * np.exp(-s * lN)
    # sum_k B_2k/(2k)! s(s+1)...(s+2k-2) N^{-s-2k+1}
    poch = s
    corr = 0.0
    for k in range(1, 21):
        term = _B2K[k - 1] / _FACT2K[k - 1] * poch * np.exp((-s - 2 * k + 1) * lN)
        corr += term
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)
    return complex(head + tail + corr)


def _zeta_reflect(s: complex) -> complex:
    # zeta(s) = 2^s pi^{s-1} sin(pi s/2) Gamma(1-s) zeta(1-s)
    return complex(
        np.exp(s * math.log(2) + (s - 1) * math.log(math.pi) + ln_gamma(1 - s))
        * np.sin(np.pi * s / 2)
        * _zeta_em(1 - s)
    )


def eta(n: int, s):
    """eta(n, s) = sum_{ad = n} (a/d)^{s - 1/2}."""
    n = abs(int(n))
    if n < 1:
        raise ValueError("eta needs n >= 1")
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    for a in divisors(n):
        out = out + np.exp((s - 0.5) * math.log(a / (n // a)))
    return out if out.ndim else complex(out)


def eisenstein_phi(s):
    """phi(s) = sqrt(pi) Gamma(s - 1/2)/Gamma(s) * zeta(2s - 1)/zeta(2s)."""
    s = np.asarray(s, dtype=complex)
    if np.any(np.abs(s - 0.5) < 1e-14) or np.any(np.abs(s - 1) < 1e-14):
        raise PoleError("phi has a pole here")
    out = math.sqrt(math.pi) * np.exp(ln_gamma(s - 0.5) - ln_gamma(s)) * zeta(2 * s - 1) / zeta(2 * s)
    return out if np.ndim(out) else complex(out)


def eisenstein_phi_n(n: int, s):
    """phi(n, s) = pi^s Gamma(s)^{-1} zeta(2s)^{-1} |n|^{-1/2} eta(n, s)."""
    s = np.asarray(s, dtype=complex)
    out = np.exp(s * math.log(math.pi) - ln_gamma(s)) / zeta(2 * s) * abs(n) ** -0.5 * eta(n, s)
    return out if np.ndim(out) else complex(out)


def omega_eisenstein(t):
    """omega(t) = 4 pi |phi(1, 1/2 + it)|^2 / cosh(pi t), evaluated in logs."""
    t = np.asarray(t, dtype=float)
    s = 0.5 + 1j * t
    logabs2 = math.log(math.pi) - 2 * np.real(ln_gamma(s)) - 2 * np.log(np.abs(zeta(2 * s)))
    at = np.abs(np.pi * t)
    logcosh = at + np.log1p(np.exp(-2 * at)) - math.log(2)
    out = 4 * math.pi * np.exp(logabs2 - logcosh)
    return out if out.ndim else float(out)
