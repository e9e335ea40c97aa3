"""Hecke operators on S_k and the Hecke eigenbasis H_k.

Eigenforms are split off by T_2 alone: the exact integer characteristic
polynomial of T_2 is computed, its real roots are isolated with exact sign
checks, and every eigenvector is solved in extended precision.  Coefficients
a(n) of each eigenform then follow from the integral Miller basis.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from sympy import Poly, ZZ, primerange, symbols
from sympy.polys.matrices import DomainMatrix

from . import _kronecker
from .space import CuspSpace, cusp_space

__all__ = [
    "DegenerateSplittingError",
    "Eigenform",
    "HeckeMatrix",
    "charpoly",
    "default_precision",
    "eigenforms",
    "hecke_basis",
    "hecke_matrix",
    "isolate_real_roots",
    "lambda_prime_power",
    "satake",
]


class DegenerateSplittingError(ArithmeticError):
    """T_2 has a repeated eigenvalue on S_k, so it does not split the space."""


def default_precision(k):
    return 64 + 2 * k


# Hecke matrices -------------------------------------------------------------

@dataclass(frozen=True)
class HeckeMatrix:
    """Matrix of T_n in the Miller basis; column j holds a_{T_n m_j}(1..dim)."""

    k: int
    n: int
    entries: tuple

    @property
    def dim(self):
        return len(self.entries)

    def __matmul__(self, other):
        if self.k != other.k:
            raise ValueError("weights differ")
        d = self.dim
        A, B = self.entries, other.entries
        out = tuple(
            tuple(sum(A[i][t] * B[t][j] for t in range(d)) for j in range(d)) for i in range(d)
        )
        return HeckeMatrix(self.k, self.n * other.n, out)

    def __sub__(self, other):
        d = self.dim
        return HeckeMatrix(
            self.k,
            self.n,
            tuple(tuple(self.entries[i][j] - other.entries[i][j] for j in range(d)) for i in range(d)),
        )

    def is_zero(self):
        return all(x == 0 for row in self.entries for x in row)

    def trace(self):
        return sum(self.entries[i][i] for i in range(self.dim))


def hecke_matrix(space: CuspSpace, n: int) -> HeckeMatrix:
    """Exact matrix of T_n via a_{T_n f}(m) = sum_{d | (m, n)} d^{k-1} a_f(mn/d^2)."""
    if n < 1:
        raise ValueError("Hecke index must be >= 1")
    d, k = space.dim, space.k
    need = n * d
    if space.trunc < need:
        raise ValueError(
            f"truncation {space.trunc} too small for T_{n} on S_{k}: need at least {need}"
        )
    rows = space.rows
    divs = [t for t in range(1, n + 1) if n % t == 0]
    entries = []
    for m in range(1, d + 1):
        row = []
        for j in range(d):
            r = rows[j]
            s = 0
            for t in divs:
                if m % t == 0:
                    s += t ** (k - 1) * r[m * n // (t * t)]
            row.append(s)
        entries.append(tuple(row))
    return HeckeMatrix(k, n, tuple(entries))


def charpoly(mat: HeckeMatrix):
    """Integer characteristic polynomial coefficients, leading coefficient first."""
    if mat.dim == 0:
        return [1]
    dm = DomainMatrix([[ZZ(int(x)) for x in row] for row in mat.entries], (mat.dim, mat.dim), ZZ)
    return [int(c) for c in dm.charpoly()]


# root isolation -------------------------------------------------------------

def _sign_at(coeffs, u: Fraction):
    """Sign of the integer polynomial at a rational point, exactly."""
    num, den = u.numerator, u.denominator
    # homogeneous Horner: sum_i c_i num^(deg-i) den^i, den > 0
    acc = coeffs[0]
    dpow = den
    for c in coeffs[1:]:
        acc = acc * num + c * dpow
        dpow *= den
    return (acc > 0) - (acc < 0)


def _mpf_to_fraction(x):
    if not isinstance(x, mpmath.mpf):
        x = mpmath.mpf(x)
    sign, man, exp, _ = x._mpf_
    val = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -val if sign else val


def isolate_real_roots(coeffs, scale_bits2, bits):
    """Certified real roots of a monic integer polynomial.

    The roots are expected to satisfy |root| <= 2 * 2^(scale_bits2/2) (the
    Deligne range for a(2) when ``scale_bits2 = k - 1``).  Returns the roots as
    mpmath numbers accurate to ``bits`` bits relative to that scale, sorted in
    descending order.  Every root is certified by an exact sign change of the
    polynomial on a disjoint rational interval; if fewer sign changes than the
    degree are found the roots are not simple and an error is raised.
    """
    deg = len(coeffs) - 1
    if deg == 0:
        return []
    prec = bits + 4 * deg + 64
    with mpmath.workprec(prec):
        s = mpmath.sqrt(mpmath.mpf(2) ** scale_bits2)
        # polynomial in t = a / s, made monic
        qc = [mpmath.mpf(c) / s ** i for i, c in enumerate(coeffs)]
        seeds = np.roots(np.array([float(c) for c in qc]))
        seeds = sorted({round(float(np.real(z)), 12) for z in seeds})
        roots = [_newton(qc, mpmath.mpf(t), prec) for t in seeds]
        roots = sorted(set(roots), reverse=True)
        if len(roots) != deg or not _certify(coeffs, roots, s, bits):
            roots = _fallback_roots(qc, prec)
            if len(roots) != deg or not _certify(coeffs, roots, s, bits):
                raise DegenerateSplittingError("characteristic polynomial roots could not be isolated")
        return [r * s for r in roots]


def _newton(qc, t, prec):
    dqc = [c * (len(qc) - 1 - i) for i, c in enumerate(qc[:-1])]
    tol = mpmath.mpf(2) ** (-prec + 8)
    for _ in range(200):
        f = mpmath.polyval(qc, t)
        df = mpmath.polyval(dqc, t)
        if df == 0:
            break
        step = f / df
        t -= step
        if abs(step) <= tol * max(1, abs(t)):
            break
    # two extra polishing steps
    for _ in range(2):
        df = mpmath.polyval(dqc, t)
        if df:
            t -= mpmath.polyval(qc, t) / df
    return t


def _fallback_roots(qc, prec):
    rts = mpmath.polyroots(qc, maxsteps=400, extraprec=2 * prec)
    return sorted((mpmath.re(r) for r in rts), reverse=True)


def _certify(coeffs, roots, s, bits):
    n = len(roots)
    gaps = [roots[i] - roots[i + 1] for i in range(n - 1)]
    if any(g <= 0 for g in gaps):
        return False
    eps = mpmath.mpf(2) ** (-bits)
    prev_hi = None
    for i, t in enumerate(roots):
        local = [g for g in (gaps[i - 1] if i > 0 else None, gaps[i] if i < n - 1 else None) if g is not None]
        rho = min([eps] + [g / 4 for g in local])
        lo = _mpf_to_fraction((t - rho) * s)
        hi = _mpf_to_fraction((t + rho) * s)
        if prev_hi is not None and hi >= prev_hi:
            return False
        if _sign_at(coeffs, lo) * _sign_at(coeffs, hi) >= 0:
            return False
        prev_hi = lo
    return True


# Satake data ----------------------------------------------------------------

def satake(lambda_p):
    """Roots (alpha, beta) of X^2 - lambda_p X + 1.

    For |lambda_p| <= 2 they are conjugate points of the unit circle and alpha
    has nonnegative imaginary part; otherwise both are real with alpha >= beta.
    """
    lam = complex(lambda_p).real
    disc = lam * lam - 4.0
    if disc <= 0:
        im = math.sqrt(-disc) / 2.0
        return complex(lam / 2.0, im), complex(lam / 2.0, -im)
    r = math.sqrt(disc)
    return complex((lam + r) / 2.0), complex((lam - r) / 2.0)


def lambda_prime_power(lambda_p, l):
    """lambda(p^l) from lambda(p) by the Hecke recurrence.

    Works for floats, Fractions and mpmath numbers alike.
    """
    if l < 0:
        raise ValueError("exponent must be >= 0")
    prev, cur = 0 * lambda_p, 1 + 0 * lambda_p
    for _ in range(l):
        prev, cur = cur, lambda_p * cur - prev
    return cur


# eigenforms -----------------------------------------------------------------

@dataclass(eq=False)
class Eigenform:
    """Normalized Hecke eigenform of level one (a(1) = 1).

    ``a`` holds extended precision coefficients a(0..trunc); ``lam`` the
    normalized eigenvalues a(n)/n^((k-1)/2) as float64.  ``l_sym2_at_1`` and
    ``petersson_norm_sq`` are filled on first use.
    """

    k: int
    index: int
    a: tuple
    lam: np.ndarray = field(repr=False)
    precision: int = 0
    residual: float = 0.0
    charpoly: tuple = field(default=(), repr=False)
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def trunc(self):
        return len(self.a) - 1

    @property
    def a2(self):
        return self.a[2]

    def series(self, N=None):
        from .exactq import QSeries

        N = self.trunc if N is None else N
        if N > self.trunc:
            raise ValueError(f"eigenform known to q^{self.trunc}, asked for q^{N}")
        return QSeries(self.k, self.a[: N + 1])

    def lam_mp(self, n):
        """Normalized eigenvalue at the working precision."""
        with mpmath.workprec(self.precision):
            return self.a[n] / mpmath.mpf(n) ** (mpmath.mpf(self.k - 1) / 2)

    def primes(self, P=None):
        P = self.trunc if P is None else min(P, self.trunc)
        return np.array(list(primerange(2, P + 1)), dtype=np.int64)

    def satake_arrays(self, P=None):
        """(primes, alpha, beta) for primes p <= P."""
        ps = self.primes(P)
        lam = self.lam[ps]
        disc = lam.astype(complex) ** 2 - 4.0
        root = np.sqrt(disc)
        alpha = (lam + root) / 2.0
        beta = (lam - root) / 2.0
        # nonnegative imaginary part for alpha; for |lam| > 2 alpha is the larger root
        swap = (alpha.imag < 0) | ((alpha.imag == 0) & (alpha.real < beta.real))
        alpha[swap], beta[swap] = beta[swap], alpha[swap]
        return ps, alpha, beta

    def cached(self, key, compute):
        """Fill a lazy cache entry once; concurrent callers wait for the writer."""
        if key in self._cache:
            return self._cache[key]
        with self._lock:
            if key not in self._cache:
                self._cache[key] = compute()
            return self._cache[key]

    @property
    def l_sym2_at_1(self):
        from .analytic import sym2_L_at_1

        return self.cached("l_sym2", lambda: sym2_L_at_1(self).value)

    @property
    def petersson_norm_sq(self):
        from .analytic import petersson_norm_quadrature

        return self.cached("norm_sq", lambda: petersson_norm_quadrature(self.series(), eigen=True).value)

    def deligne_violations(self, P=None, tol=1e-6):
        ps = self.primes(P)
        return [int(p) for p in ps if abs(self.lam[p]) > 2 + tol]


def _guard_bits(space):
    top = 0
    for r in space.rows:
        for c in r:
            b = abs(c).bit_length()
            if b > top:
                top = b
    # eigenvector coordinates a(1..dim) spread over about n^((k-1)/2)
    spread = int(math.ceil((space.k - 1) / 2 * math.log2(max(space.dim, 2))))
    return top + spread + 2 * space.dim.bit_length() + 32


def eigenforms(space: CuspSpace, precision: int | None = None):
    """Hecke eigenbasis of ``space`` sorted by descending a(2).

    Coefficients a(n) are produced for every n up to the space truncation.
    """
    k, d = space.k, space.dim
    if d < 1:
        raise ValueError(f"S_{k} is zero-dimensional")
    precision = default_precision(k) if precision is None else int(precision)
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    if space.trunc < 2 * d:
        raise ValueError(f"truncation {space.trunc} too small: T_2 on S_{k} needs {2 * d}")
    t2 = hecke_matrix(space, 2)
    cp = charpoly(t2)
    if d > 1 and not Poly(cp, symbols("x"), domain=ZZ).is_sqf:
        raise DegenerateSplittingError(
            f"T_2 has a repeated eigenvalue on S_{k}; no secondary splitting operator is used"
        )
    work = precision + _guard_bits(space)
    try:
        roots = isolate_real_roots(cp, k - 1, work)
    except DegenerateSplittingError as exc:
        raise DegenerateSplittingError(f"S_{k}: {exc}") from None

    vecs, residuals = [], []
    with mpmath.workprec(work):
        M = mpmath.matrix([[mpmath.mpf(x) for x in row] for row in t2.entries])
        for lam in roots:
            v, res = _eigenvector(M, lam, d)
            vecs.append(v)
            residuals.append(res)
        coeff_rows = _combine_rows(space, vecs, work)

    out = []
    half = mpmath.mpf(k - 1) / 2
    for idx, (ints, res, lam) in enumerate(zip(coeff_rows, residuals, roots)):
        with mpmath.workprec(precision):
            a = tuple(mpmath.ldexp(mpmath.mpf(c), -work) for c in ints)
            a = (mpmath.mpf(0), mpmath.mpf(1)) + a[2:]
        with mpmath.workprec(64):
            lam_arr = np.zeros(len(a))
            for n in range(1, len(a)):
                lam_arr[n] = float(a[n] / mpmath.mpf(n) ** half)
        out.append(
            Eigenform(k=k, index=idx, a=a, lam=lam_arr, precision=precision,
                      residual=float(res), charpoly=tuple(cp))
        )
    return out


def _eigenvector(M, lam, d):
    """Solve (M - lam I) v = 0 with v_1 = 1; returns v and the relative residual."""
    A = M.copy()
    for i in range(d):
        A[i, i] -= lam
    if d == 1:
        v = [mpmath.mpf(1)]
    else:
        sub = A[:, 1:]
        rhs = -A[:, 0]
        sol, _ = mpmath.qr_solve(sub, rhs)
        v = [mpmath.mpf(1)] + [sol[i] for i in range(d - 1)]
    r = A * mpmath.matrix(v)
    res = max(abs(r[i]) for i in range(d)) / max(abs(x) for x in v)
    return v, res


def _combine_rows(space, vecs, work):
    """Fixed-point sum_i v_i * miller_i(n) for every eigenvector at once."""
    rows = space.rows
    n = space.trunc + 1
    top = max(abs(c).bit_length() for r in rows for c in r)
    ints = [[int(mpmath.nint(mpmath.ldexp(x, work))) for x in v] for v in vecs]
    vbits = max(abs(c).bit_length() for V in ints for c in V)
    # each slot holds |sum_i V_i m_i(n)| <= dim * max|V| * max|m|
    w = _kronecker.slot_bytes(vbits + top + space.dim.bit_length() + 4)
    packed = [_kronecker._pack(list(r), w) for r in rows]
    out = []
    for V in ints:
        X = 0
        for coef, P in zip(V, packed):
            X += coef * P
        out.append(_kronecker._unpack(X, w, n))
    return out


_BASES = {}
_BASES_LOCK = threading.Lock()


def hecke_basis(k, N=None, precision=None):
    """Memoized eigenbasis of S_k with coefficients known to at least q^N."""
    from .space import dim_cusp

    d = dim_cusp(k)
    if d == 0:
        return []
    N = max(N or 0, 2 * d, d + 1)
    precision = default_precision(k) if precision is None else int(precision)
    key = (k, precision)
    with _BASES_LOCK:
        cached = _BASES.get(key)
    if cached is not None and cached[0].trunc >= N:
        return cached
    basis = eigenforms(cusp_space(k, N), precision)
    with _BASES_LOCK:
        cur = _BASES.get(key)
        if cur is None or cur[0].trunc < N:
            _BASES[key] = basis
        else:
            basis = cur
    return basis
