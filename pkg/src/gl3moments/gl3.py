"""GL(3) Fourier coefficients A(m, n) and GL(2) Maass form records.

Local coefficients are Schur polynomials of Satake triples,
A(p^j, p^k) = s_{(j+k, k, 0)}(x, y, z) with xyz = 1, so every Hecke relation
is an identity of symmetric functions.  Two coefficient corpora are provided:
symmetric-square lifts (from GL(2) Hecke eigenvalues, in particular the
Ramanujan Delta function) and Eisenstein-type systems with arbitrary
Langlands parameters.
"""
from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np
import scipy.special as sps

try:
    from gmpy2 import mpz as _mpz
except ImportError:  # optional speed-up
    _mpz = None

from .arith import _spf_table, divisors, factorize, is_prime
from .errors import MissingPrimeError, ParseError, RangeError, ValidationError
from .special_fn import ArchimedeanData, LanglandsParams

__all__ = [
    "SatakeLocal",
    "GL3Coefficients",
    "MaassFormRecord",
    "coefficient",
    "coefficient_table",
    "hecke_shift_identity",
    "rankin_selberg_partial",
    "l_value_at_one",
    "ingest_maass_data",
    "write_maass_data",
    "ramanujan_tau",
    "sym2_delta",
    "sym2_lift",
    "eisenstein_coefficients",
    "degenerate_coefficients",
    "schur_local",
]

MAX_EXPONENT = 64


# ---------------------------------------------------------------------------
# local data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SatakeLocal:
    """Satake triple at p with product 1."""

    p: int
    alpha: tuple

    def __post_init__(self):
        a = tuple(complex(v) for v in self.alpha)
        if len(a) != 3:
            raise ValueError("Satake data is a triple")
        if abs(a[0] * a[1] * a[2] - 1) > 1e-12:
            raise ValueError(f"Satake triple at p={self.p} has product {a[0] * a[1] * a[2]}")
        object.__setattr__(self, "alpha", a)

    @property
    def e1(self) -> complex:
        x, y, z = self.alpha
        return x + y + z

    @property
    def e2(self) -> complex:
        x, y, z = self.alpha
        return x * y + y * z + z * x


def _complete_homogeneous(e1: complex, e2: complex, n: int) -> np.ndarray:
    """h_0..h_n of a triple with elementary symmetric values (e1, e2, 1)."""
    h = np.zeros(n + 1, dtype=complex)
    h[0] = 1.0
    for i in range(1, n + 1):
        v = e1 * h[i - 1]
        if i >= 2:
            v -= e2 * h[i - 2]
        if i >= 3:
            v += h[i - 3]
        h[i] = v
    return h


@lru_cache(maxsize=1 << 16)
def _schur_cached(e1: complex, e2: complex, j: int, k: int) -> complex:
    # s_{(a, b)} = h_a h_b - h_{a+1} h_{b-1} (two-row Jacobi-Trudi), a = j+k, b = k
    a, b = j + k, k
    h = _complete_homogeneous(e1, e2, a + 1)
    if b == 0:
        return complex(h[a])
    return complex(h[a] * h[b] - h[a + 1] * h[b - 1])


def schur_local(local: SatakeLocal, j: int, k: int) -> complex:
    """A(p^j, p^k) = s_{(j+k, k, 0)}(Satake triple)."""
    if j > MAX_EXPONENT or k > MAX_EXPONENT:
        raise RangeError("exponent exceeds 64")
    return _schur_cached(local.e1, local.e2, int(j), int(k))


# ---------------------------------------------------------------------------
# coefficient systems
# ---------------------------------------------------------------------------


@dataclass
class GL3Coefficients:
    """Evaluator of A(m, n) with A(1, 1) = 1.

    ``locals`` maps primes to SatakeLocal; ``local_factory`` (optional) builds
    missing primes on demand; ``table`` (explicit backend) maps (m, n) to a
    value and is consulted before multiplicativity.
    """

    backend: str = "satake_table"
    locals: dict = field(default_factory=dict)
    local_factory: Callable | None = None
    table: dict | None = None
    arch: ArchimedeanData | None = None
    name: str = "gl3"
    self_dual: bool = False
    eisenstein_params: LanglandsParams | None = None
    _dual_of: "GL3Coefficients | None" = None

    def local(self, p: int) -> SatakeLocal:
        loc = self.locals.get(p)
        if loc is None:
            if self.local_factory is None:
                raise MissingPrimeError(f"no Satake data at p={p}")
            loc = self.local_factory(p)
            self.locals[p] = loc
        return loc

    def __call__(self, m: int, n: int) -> complex:
        return coefficient(self, m, n)

    def dual(self) -> "GL3Coefficients":
        """f-tilde: coefficient(dual, m, n) = coefficient(self, n, m)."""
        d = GL3Coefficients(
            backend="dual",
            arch=None if self.arch is None else self.arch.dual(),
            name=self.name + "~",
            self_dual=self.self_dual,
            eisenstein_params=None if self.eisenstein_params is None else self.eisenstein_params.dual(),
        )
        d._dual_of = self
        return d

    def row(self, m: int, n_max: int) -> np.ndarray:
        """A(n, m) for n = 1..n_max (index 0 holds n = 1)."""
        return coefficient_table(self, n_max, m, transpose=False)

    def column(self, m: int, n_max: int) -> np.ndarray:
        """A(m, n) for n = 1..n_max."""
        return coefficient_table(self, n_max, m, transpose=True)


def coefficient(f: GL3Coefficients, m: int, n: int) -> complex:
    """A(m, n) by multiplicativity over the primes dividing mn."""
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise ValueError("coefficients are indexed by positive integers")
    if f._dual_of is not None:
        return coefficient(f._dual_of, n, m)
    if f.table is not None and (m, n) in f.table:
        return complex(f.table[(m, n)])
    if f.backend == "explicit_table":
        raise MissingPrimeError(f"A({m},{n}) not in table")
    fm, fn = factorize(m) if m > 1 else {}, factorize(n) if n > 1 else {}
    out = 1.0 + 0j
    for p in set(fm) | set(fn):
        out *= schur_local(f.local(p), fm.get(p, 0), fn.get(p, 0))
    return out


def coefficient_table(f: GL3Coefficients, N: int, m: int = 1, transpose: bool = False) -> np.ndarray:
    """A(n, m) (or A(m, n) with ``transpose``) for n = 1..N in one sieve pass.

    n = p^k r with p the smallest prime factor gives A(n, m) from the local
    value at p and the already computed A(r, m)-part.
    """
    N, m = int(N), int(m)
    if N < 1:
        return np.zeros(0, dtype=complex)
    if m < 1:
        raise ValueError("coefficients are indexed by positive integers")
    if f._dual_of is not None:
        return coefficient_table(f._dual_of, N, m, not transpose)
    if f.backend == "explicit_table" or f.table is not None:
        if transpose:
            return np.array([coefficient(f, m, n) for n in range(1, N + 1)])
        return np.array([coefficient(f, n, m) for n in range(1, N + 1)])
    fm = factorize(m) if m > 1 else {}
    cache: dict = {}

    def local_val(p, k):
        key = (p, k)
        v = cache.get(key)
        if v is None:
            j = fm.get(p, 0)
            v = schur_local(f.local(p), j, k) if transpose else schur_local(f.local(p), k, j)
            cache[key] = v
        return v

    spf = _spf_table(N).tolist()
    val = [0j] * (N + 1)
    expo = [0] * (N + 1)
    rest = [1] * (N + 1)
    val[1] = 1 + 0j
    for n in range(2, N + 1):
        p = spf[n]
        r = n // p
        if r % p == 0:
            expo[n] = expo[r] + 1
            rest[n] = rest[r]
        else:
            expo[n] = 1
            rest[n] = r
        val[n] = local_val(p, expo[n]) * val[rest[n]]
    out = np.array(val[1:], dtype=complex)
    # primes of m that do not divide n still contribute their local factor at exponent 0
    ns = np.arange(1, N + 1)
    for q, j in fm.items():
        v0 = schur_local(f.local(q), j, 0) if transpose else schur_local(f.local(q), 0, j)
        out[ns % q != 0] *= v0
    return out


def hecke_shift_identity(f: GL3Coefficients, p: int, m: int):
    """(A(p, mp), A(p,1) A(1, pm) - A(1, m))."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    lhs = coefficient(f, p, m * p)
    rhs = coefficient(f, p, 1) * coefficient(f, 1, p * m) - coefficient(f, 1, m)
    return lhs, rhs


def rankin_selberg_partial(f: GL3Coefficients, N: int) -> float:
    """sum over m^2 n <= N of |A(m, n)|^2."""
    total = 0.0
    m = 1
    while m * m <= N:
        for n in range(1, N // (m * m) + 1):
            total += abs(coefficient(f, m, n)) ** 2
        m += 1
    return total


@dataclass(frozen=True)
class LValue:
    value: float
    error: float
    truncation: int
    converged: bool

    def __float__(self):
        return self.value


def l_value_at_one(f: GL3Coefficients, derivative_order: int = 0, truncation: int = 1000,
                   method: str = "partial") -> LValue:
    """L(1, f) (order 0) or L'(1, f) (order 1) from the Dirichlet series sum A(m, 1) m^{-1}.

    method="partial": the raw truncated sum.  The error is a heuristic tail
    bound: partial sums of A(m, 1) behave like sqrt(x) times the
    Rankin-Selberg mean square, giving about 3 sqrt(mean |A|^2) (log N)^order / sqrt(N).

    method="riesz": second-order Riesz means sum A(m,1) m^{-1} (1 - m/N)^2.
    Their Mellin kernel is 2 N^w / (w (w+1) (w+2)); shifting past w = 0 and
    w = -1 (convexity bound on the shifted line) gives R(N) = L + c/N + O(N^{-7/6}),
    so 2 R(N) - R(N/2) removes the 1/N term.
    The error is |R~(N) - R~(N/2)| for the extrapolated values R~.

    method="afe": the smoothed functional equation of the completed
    L-function, which converges exponentially.  Needs ``f.arch`` and an
    entire L-function, so Eisenstein systems are rejected.  The error is
    the change when the balancing point of the two dual sums moves.

    ``converged`` is False when halving the truncation moves the value by
    more than the error (for "afe": when the error exceeds 1e-10 relative).
    """
    if derivative_order not in (0, 1):
        raise ValueError("derivative_order must be 0 or 1")
    if truncation < 100:
        raise ValueError("truncation must be at least 100")
    if method not in ("partial", "riesz", "afe"):
        raise ValueError("method must be 'partial', 'riesz' or 'afe'")
    if method == "afe":
        return _l_value_afe(f, derivative_order, int(truncation))
    N = int(truncation)
    a = coefficient_table(f, N, 1)
    ms = np.arange(1, N + 1, dtype=float)
    terms = a * (-np.log(ms)) ** derivative_order / ms

    def clean(z):
        z = complex(z)
        return z.real if abs(z.imag) < 1e-12 * max(1.0, abs(z)) else z

    if method == "partial":
        val = complex(np.sum(terms))
        half = complex(np.sum(terms[: N // 2]))
        mean_sq = float(np.mean(np.abs(a) ** 2))
        err = 3.0 * math.sqrt(mean_sq) * math.log(N) ** derivative_order / math.sqrt(N)
        return LValue(clean(val), err, N, abs(val - half) <= err)

    def riesz(n):
        return complex(np.sum(terms[:n] * (1.0 - ms[:n] / n) ** 2))

    r1, r2, r4 = riesz(N), riesz(N // 2), riesz(N // 4)
    val = 2 * r1 - r2
    prev = 2 * r2 - r4
    err = abs(val - prev)
    # a second halving should move the extrapolation by about 4x the first move
    converged = err <= 0.5 * abs(r1 - r2) + 1e-15
    return LValue(clean(val), err, N, converged)


def _log_gamma_factor(arch: ArchimedeanData, s):
    """(log gamma_inf(s), d/ds log gamma_inf(s)) for the archimedean factor ``arch``."""
    s = np.asarray(s, dtype=complex)
    lg = np.zeros(s.shape, dtype=complex)
    dlg = np.zeros(s.shape, dtype=complex)
    for mu, delta in arch.real_factors:
        z = s + mu + delta
        lg += -0.5 * z * math.log(math.pi) + sps.loggamma(z / 2)
        dlg += -0.5 * math.log(math.pi) + 0.5 * sps.digamma(z / 2)
    for mu in arch.complex_factors:
        z = s + mu
        lg += math.log(2.0) - z * math.log(2 * math.pi) + sps.loggamma(z)
        dlg += -math.log(2 * math.pi) + sps.digamma(z)
    return lg, dlg


def _afe_kernels(arch: ArchimedeanData, s: complex, x: np.ndarray, c: float = 1.5, h: float = 0.05):
    """I(x) and dI/ds(x) with I(x) = (1/2 pi i) int_(c) gamma_inf(s + w) x^{-w} dw / w.

    Trapezoid rule on Re w = c; the integrand is analytic for Re w > 0 and
    decays like exp(-pi d |Im w| / 4) for a degree-d factor.
    """
    shifts = [abs(complex(m)) for m, _ in arch.real_factors] + [abs(complex(m)) for m in arch.complex_factors]
    H = 60.0 + 4.0 * max(shifts, default=0.0)
    tau = np.arange(-H, H + h / 2, h)
    w = c + 1j * tau
    lg, dlg = _log_gamma_factor(arch, s + w)
    g = np.exp(lg) / w * (h / (2 * math.pi))
    lx = np.log(np.asarray(x, dtype=float))
    # x^{-w} = x^{-c} e^{-i tau log x}
    phase = np.exp(-1j * np.outer(lx, tau))
    scale = np.exp(-c * lx)
    return scale * (phase @ g), scale * (phase @ (g * dlg))


def _l_value_afe(f: GL3Coefficients, order: int, N: int) -> LValue:
    if f.arch is None:
        raise ValueError("method='afe' needs archimedean data on the coefficient system")
    if f.eisenstein_params is not None:
        raise ValueError("method='afe' needs an entire L-function; Eisenstein systems have poles")
    arch, darch = f.arch, f.arch.dual()
    eps = arch.root_number()
    n = np.arange(1, N + 1, dtype=float)
    a = coefficient_table(f, N, 1)
    ad = coefficient_table(f, N, 1, transpose=True)
    ln = np.log(n)
    lg1, dlg1 = _log_gamma_factor(arch, np.array([1.0]))
    gamma1 = complex(np.exp(lg1[0]))

    def values(X):
        # Lambda(s) = sum a_n n^{-s} I(n/X; s) + eps sum a~_n n^{s-1} I~(nX; 1-s) at s = 1
        I, dI = _afe_kernels(arch, 1.0, n / X)
        It, dIt = _afe_kernels(darch, 0.0, n * X)
        lam = np.sum(a / n * I) + eps * np.sum(ad * It)
        dlam = np.sum(a / n * (dI - ln * I)) + eps * np.sum(ad * (ln * It - dIt))
        L = lam / gamma1
        # size of the last terms kept: a cheap truncation check
        tail = (abs(a[-1] * I[-1]) / N + abs(ad[-1] * It[-1])) * (1 + ln[-1]) / abs(gamma1)
        return (L if order == 0 else dlam / gamma1 - L * complex(dlg1[0])), tail

    (v1, t1), (v2, t2) = values(1.0), values(1.25)
    v1, v2 = complex(v1), complex(v2)
    err = abs(v1 - v2) + t1 + t2
    val = v1.real if abs(v1.imag) < 1e-12 * max(1.0, abs(v1)) else v1
    return LValue(val, err, N, err <= 1e-10 * max(1.0, abs(v1)))


# ---------------------------------------------------------------------------
# corpora
# ---------------------------------------------------------------------------


def _poly_to_int(coeffs: list, B: int) -> int:
    pos = bytearray(len(coeffs) * (B // 8))
    neg = bytearray(len(coeffs) * (B // 8))
    nb = B // 8
    for i, c in enumerate(coeffs):
        if c > 0:
            pos[i * nb : (i + 1) * nb] = c.to_bytes(nb, "little")
        elif c < 0:
            neg[i * nb : (i + 1) * nb] = (-c).to_bytes(nb, "little")
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _int_to_poly(v: int, n: int, B: int) -> list:
    # balanced digits: add the offset sum (X/2) X^i so every digit is nonnegative
    X = 1 << B
    half = X >> 1
    offset = half * ((X ** n - 1) // (X - 1))
    # digits below X^n are exact after adding the offset; carries only move upward
    w = (v + offset) & ((1 << (B * n)) - 1)
    nb = B // 8
    raw = w.to_bytes(n * nb, "little")
    return [int.from_bytes(raw[i * nb : (i + 1) * nb], "little") - half for i in range(n)]


def _series_square(coeffs: list, n: int, B: int) -> list:
    v = _poly_to_int(coeffs[:n], B)
    if _mpz is not None:
        # GMP's FFT multiplication; the Python fallback is Karatsuba
        v = _mpz(v)
        return _int_to_poly(int(v * v), n, B)
    return _int_to_poly(v * v, n, B)


@lru_cache(maxsize=4)
def _tau_table(N: int) -> tuple:
    """tau(1..N) exactly, from Delta = q (eta^3)^8 with Jacobi's eta^3 series."""
    n = N  # coefficients of q^0..q^{N-1} of eta^24 / q-shift
    e3 = [0] * n
    k = 0
    while k * (k + 1) // 2 < n:
        e3[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    B = 256
    s = e3
    for _ in range(3):
        s = _series_square(s, n, B)
    return tuple(s)  # s[i] = tau(i+1)


def ramanujan_tau(N: int) -> list:
    """[tau(1), ..., tau(N)] as exact integers."""
    size = 1 << max(10, int(math.ceil(math.log2(max(N, 2)))))
    return list(_tau_table(size)[:N])


def sym2_lift(hecke_eigenvalue: Callable, name: str = "sym2", arch: ArchimedeanData | None = None) -> GL3Coefficients:
    """Symmetric-square lift from GL(2) normalized eigenvalues lambda(p).

    With lambda(p) = a + 1/a the Satake triple is (a^2, 1, a^{-2}); both
    elementary symmetric functions equal lambda(p)^2 - 1.
    """

    def factory(p):
        lam = complex(hecke_eigenvalue(p))
        disc = np.sqrt(lam * lam - 4 + 0j)
        a = (lam + disc) / 2
        if abs(a) < 1e-300:
            a = (lam - disc) / 2
        trip = (a * a, 1.0, 1.0 / (a * a))
        return SatakeLocal(p, trip)

    return GL3Coefficients(local_factory=factory, name=name, self_dual=True, arch=arch)


_TAU_LIMIT = [1 << 15]


def _delta_lambda(p: int) -> float:
    if p > _TAU_LIMIT[0]:
        _TAU_LIMIT[0] = 1 << int(math.ceil(math.log2(p)))
    tau = _tau_table(_TAU_LIMIT[0])
    return tau[p - 1] / p ** 5.5


def sym2_delta() -> GL3Coefficients:
    """Symmetric-square lift of the Ramanujan Delta function (weight 12)."""
    return sym2_lift(_delta_lambda, name="sym2Delta", arch=ArchimedeanData.holomorphic_sym2(12))


def eisenstein_coefficients(params: LanglandsParams) -> GL3Coefficients:
    """Minimal-parabolic Eisenstein coefficients with L(s, f) = prod_j zeta(s - alpha_j).

    Satake triple at p is (p^alpha, p^beta, p^gamma), matching the archimedean
    factor prod Gamma_R(s - alpha_j).
    """
    if not isinstance(params, LanglandsParams):
        params = LanglandsParams(*params)
    al = params.as_tuple()

    def factory(p):
        lp = math.log(p)
        return SatakeLocal(p, tuple(np.exp(a * lp) for a in al))

    sd = params.is_unitary() and all(
        any(abs(-a - b) < 1e-12 for b in al) for a in al
    )
    return GL3Coefficients(
        local_factory=factory,
        name=f"eis[{params.key()}]",
        arch=ArchimedeanData.spherical(params),
        self_dual=sd,
        eisenstein_params=params,
    )


def degenerate_coefficients() -> GL3Coefficients:
    """A(1,1) = 1 and every other coefficient 0 (explicit table)."""

    class _Delta(dict):
        def __contains__(self, key):
            return True

        def __getitem__(self, key):
            return 1.0 if tuple(key) == (1, 1) else 0.0

    return GL3Coefficients(backend="explicit_table", table=_Delta(), name="delta", self_dual=True)


# ---------------------------------------------------------------------------
# GL(2) Maass forms
# ---------------------------------------------------------------------------


@dataclass
class MaassFormRecord:
    """One Hecke-Maass cusp form for SL(2, Z)."""

    t_j: float
    parity: str
    omega_j: float
    lam: np.ndarray  # lam[n-1] = lambda_j(n)

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        self.lam = np.asarray(self.lam, dtype=float)

    @property
    def n_max(self) -> int:
        return len(self.lam)

    def coefficient(self, n: int) -> float:
        if n < 1 or n > len(self.lam):
            raise MissingPrimeError(f"lambda({n}) not available (have 1..{len(self.lam)})")
        return float(self.lam[n - 1])

    def hecke_defect(self) -> float:
        """max |lambda(m)lambda(n) - sum_{d|(m,n)} lambda(mn/d^2)| over mn <= N."""
        N = len(self.lam)
        worst = 0.0
        for m in range(2, N + 1):
            for n in range(m, N // m + 1):
                g = math.gcd(m, n)
                rhs = sum(self.lam[m * n // (d * d) - 1] for d in divisors(g))
                worst = max(worst, abs(self.lam[m - 1] * self.lam[n - 1] - rhs))
        return worst


_FORM_RE = re.compile(r"^form\s+(.*)$")
_KV_RE = re.compile(r"(\w+)=(\S+)")


def _validate(rec: MaassFormRecord, line: int, tol: float):
    if rec.n_max < 1 or abs(rec.lam[0] - 1) > 1e-9:
        raise ValidationError(f"form ending before line {line}: lambda(1) must equal 1")
    if not rec.omega_j > 0:
        raise ValidationError(f"form ending before line {line}: omega must be positive")
    defect = rec.hecke_defect()
    if defect > tol:
        raise ValidationError(
            f"form t={rec.t_j}: Hecke multiplicativity defect {defect:.3g} exceeds {tol:g}"
        )


def ingest_maass_data(source, hecke_tol: float = 1e-6) -> list:
    """Parse and validate the ``maass v1`` line format.

    ``source`` is a path, a file object or an iterable of lines.
    """
    if isinstance(source, (str, bytes)) and not str(source).lstrip().startswith(("maass", "#")) and "\n" not in str(source):
        with open(source, encoding="utf-8") as fh:
            return ingest_maass_data(fh, hecke_tol)
    if isinstance(source, str):
        source = io.StringIO(source)
    records: list = []
    header_seen = False
    cur = None
    lam: dict = {}
    last_line = 0

    def close(lineno):
        if cur is None:
            return
        n_max = max(lam) if lam else 0
        if sorted(lam) != list(range(1, n_max + 1)):
            raise ParseError("lambda indices must run 1..N without gaps", lineno)
        rec = MaassFormRecord(cur[0], cur[1], cur[2], np.array([lam[n] for n in range(1, n_max + 1)]))
        _validate(rec, lineno, hecke_tol)
        records.append(rec)

    for lineno, raw in enumerate(source, start=1):
        last_line = lineno
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header_seen:
            if line != "maass v1":
                raise ParseError(f"expected header 'maass v1', got {line!r}", lineno)
            header_seen = True
            continue
        mo = _FORM_RE.match(line)
        if mo:
            close(lineno)
            kv = dict(_KV_RE.findall(mo.group(1)))
            try:
                t = float(kv["t_j"])
                par = kv["parity"]
                om = float(kv["omega"])
            except (KeyError, ValueError) as exc:
                raise ParseError(f"bad form header: {exc}", lineno) from None
            if par not in ("even", "odd"):
                raise ParseError(f"parity must be even or odd, got {par!r}", lineno)
            cur = (t, par, om)
            lam = {}
            continue
        parts = line.split()
        if parts[0] == "lambda" and len(parts) == 3 and cur is not None:
            try:
                n = int(parts[1])
                v = float(parts[2])
            except ValueError:
                raise ParseError(f"bad lambda line {line!r}", lineno) from None
            if n in lam:
                raise ParseError(f"duplicate lambda({n})", lineno)
            lam[n] = v
            continue
        raise ParseError(f"unrecognized line {line!r}", lineno)
    close(last_line + 1)
    return records


def write_maass_data(records: Iterable[MaassFormRecord], fh, comment: str | None = None):
    """Serialize records in the ``maass v1`` format."""
    if comment:
        for c in comment.splitlines():
            fh.write(f"# {c}\n")
    fh.write("maass v1\n")
    for r in records:
        fh.write(f"form t_j={r.t_j:.12f} parity={r.parity} omega={r.omega_j:.12e}\n")
        for n, v in enumerate(r.lam, start=1):
            fh.write(f"lambda {n} {v:.12e}\n")
