"""Truncated q-expansions and the level-one generators E4, E6 and Delta.

A :class:`QSeries` holds the coefficients ``a_0 .. a_N`` of a modular form
together with its weight.  Exact series carry :class:`fractions.Fraction`
coefficients; series built from eigenforms or complex scalars carry mpmath
numbers instead.  Arithmetic never extends a truncation: every result keeps
the smaller of its operands' truncations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

import mpmath

from ._kronecker import int_convolve

__all__ = [
    "QSeries",
    "constant_one",
    "delta",
    "divisor_sums",
    "eisenstein",
    "series_linear",
    "series_mul",
]

_EIS_CONST = {4: 240, 6: -504}


def _is_exact(x):
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


@dataclass(frozen=True, eq=False)
class QSeries:
    """Weight-tagged truncated q-expansion ``sum_{n<=trunc} a_n q^n``."""

    weight: int
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise ValueError("a q-series needs at least the constant coefficient")
        if self.weight < 0 or self.weight % 2:
            raise ValueError(f"weight must be an even integer >= 0, got {self.weight}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @classmethod
    def from_ints(cls, weight, numerators, denominator=1):
        den = int(denominator)
        return cls(weight, tuple(Fraction(int(c), den) for c in numerators))

    @property
    def trunc(self):
        return len(self.coeffs) - 1

    @property
    def exact(self):
        return all(_is_exact(c) for c in self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, n):
        return self.coeffs[n]

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:6])
        more = ", ..." if len(self.coeffs) > 6 else ""
        return f"QSeries(weight={self.weight}, trunc={self.trunc}, [{head}{more}])"

    def truncate(self, n):
        if n > self.trunc:
            raise ValueError(f"cannot extend truncation {self.trunc} to {n}")
        return QSeries(self.weight, self.coeffs[: n + 1])

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_cuspidal(self):
        return self.coeffs[0] == 0

    def equals(self, other):
        """Exact coefficientwise equality at the common truncation."""
        n = min(self.trunc, other.trunc)
        return self.weight == other.weight and self.coeffs[: n + 1] == other.coeffs[: n + 1]

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return series_linear([(1, self), (1, other)])

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return series_linear([(1, self), (-1, other)])

    def __neg__(self):
        return series_linear([(-1, self)])

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return series_mul(self, other)
        if isinstance(other, Number) or isinstance(other, (mpmath.mpf, mpmath.mpc)):
            return series_linear([(other, self)])
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = constant_one(self.trunc)
        base = self
        while e:
            if e & 1:
                out = series_mul(out, base)
            e >>= 1
            if e:
                base = series_mul(base, base)
        return out

    # serialization --------------------------------------------------------
    def to_dict(self):
        if not self.exact:
            raise TypeError("only exact series serialize to the rational JSON format")
        coeffs = []
        for c in self.coeffs:
            c = Fraction(c)
            coeffs.append(f"{c.numerator}/{c.denominator}")
        return {"weight": self.weight, "trunc": self.trunc, "coeffs": coeffs}

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d):
        coeffs = tuple(Fraction(s) for s in d["coeffs"])
        if len(coeffs) != int(d["trunc"]) + 1:
            raise ValueError(
                f"coefficient count {len(coeffs)} does not match trunc={d['trunc']}"
            )
        return cls(int(d["weight"]), coeffs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# helpers --------------------------------------------------------------------

def _int_view(s):
    """(numerators, common denominator) of an exact series."""
    den = 1
    for c in s.coeffs:
        d = c.denominator
        if d != 1:
            den = den * d // math.gcd(den, d)
    if den == 1:
        return [c.numerator for c in s.coeffs], 1
    return [c.numerator * (den // c.denominator) for c in s.coeffs], den


def _to_mp(c):
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    if isinstance(c, complex):
        return mpmath.mpc(c)
    if isinstance(c, (mpmath.mpf, mpmath.mpc)):
        return c
    return mpmath.mpf(c)


def _bits(c):
    if isinstance(c, mpmath.mpf):
        return c._mpf_[3]
    if isinstance(c, mpmath.mpc):
        return max(c.real._mpf_[3], c.imag._mpf_[3])
    return 0


def _numeric_prec(*groups):
    """Working precision for numeric series arithmetic: the widest mantissa
    among the inputs, never below the ambient mpmath precision."""
    top = 0
    for g in groups:
        for c in g:
            b = _bits(c)
            if b > top:
                top = b
    return max(mpmath.mp.prec, top)


def divisor_sums(N, j):
    """``[0, sigma_j(1), ..., sigma_j(N)]``."""
    s = [0] * (N + 1)
    for d in range(1, N + 1):
        dj = d ** j
        for m in range(d, N + 1, d):
            s[m] += dj
    return s


def constant_one(N):
    """The constant series 1 as a weight-0 form."""
    return QSeries(0, (Fraction(1),) + (Fraction(0),) * N)


def eisenstein(k, N):
    """Normalized Eisenstein series E_k for k in {4, 6}, truncated at q^N."""
    if k not in _EIS_CONST:
        raise ValueError(f"unsupported Eisenstein weight {k}; allowed weights are 4 and 6")
    if N < 0:
        raise ValueError("truncation must be >= 0")
    c = _EIS_CONST[k]
    s = divisor_sums(N, k - 1)
    return QSeries.from_ints(k, [1] + [c * x for x in s[1:]])


def _delta_ints(N):
    e4 = [1] + [240 * x for x in divisor_sums(N, 3)[1:]]
    e6 = [1] + [-504 * x for x in divisor_sums(N, 5)[1:]]
    n = N + 1
    e4cube = int_convolve(int_convolve(e4, e4, n), e4, n)
    e6sq = int_convolve(e6, e6, n)
    out = []
    for x, y in zip(e4cube, e6sq):
        q, r = divmod(x - y, 1728)
        assert r == 0
        out.append(q)
    return out


def delta(N):
    """Delta = (E4^3 - E6^2)/1728 truncated at q^N."""
    if N < 0:
        raise ValueError("truncation must be >= 0")
    return QSeries.from_ints(12, _delta_ints(N))


def series_mul(a, b):
    """Cauchy product; weights add and the truncation is the smaller one."""
    n = min(a.trunc, b.trunc) + 1
    weight = a.weight + b.weight
    if a.exact and b.exact:
        na, da = _int_view(a)
        nb, db = _int_view(b)
        prod = int_convolve(na, nb, n)
        return QSeries.from_ints(weight, prod, da * db)
    with mpmath.workprec(_numeric_prec(a.coeffs[:n], b.coeffs[:n])):
        xa = [_to_mp(c) for c in a.coeffs[:n]]
        xb = [_to_mp(c) for c in b.coeffs[:n]]
        out = [mpmath.fdot(xa[: m + 1], xb[m::-1]) for m in range(n)]
    return QSeries(weight, tuple(out))


def series_linear(terms):
    """Coefficientwise linear combination ``sum scalar * series``.

    Scalars may be rationals, floats, complex numbers or mpmath numbers; only
    rational scalars applied to exact series keep the result exact.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("empty linear combination")
    weights = {s.weight for _, s in terms}
    if len(weights) != 1:
        raise ValueError(f"cannot combine series of different weights {sorted(weights)}")
    weight = weights.pop()
    n = min(s.trunc for _, s in terms) + 1
    exact = all(_is_exact(c) for c, _ in terms) and all(s.exact for _, s in terms)
    if exact:
        out = [Fraction(0)] * n
        for c, s in terms:
            c = Fraction(c)
            if c == 0:
                continue
            for i in range(n):
                out[i] += c * s.coeffs[i]
        return QSeries(weight, tuple(out))
    prec = _numeric_prec([c for c, _ in terms], *(s.coeffs[:n] for _, s in terms))
    with mpmath.workprec(prec):
        out = [mpmath.mpf(0)] * n
        for c, s in terms:
            c = _to_mp(c)
            if c == 0:
                continue
            for i in range(n):
                out[i] += c * _to_mp(s.coeffs[i])
    return QSeries(weight, tuple(out))
