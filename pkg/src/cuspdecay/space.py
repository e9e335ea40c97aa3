"""Level-one cusp form spaces S_k and their echelon (Miller) bases."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction

from ._kronecker import int_convolve
from .exactq import QSeries, _delta_ints, divisor_sums

__all__ = [
    "CuspSpace",
    "cusp_space",
    "dim_cusp",
    "miller_basis",
    "monomial_exponents",
    "monomial_rank",
]


def dim_cusp(k):
    """Dimension of S_k for SL_2(Z)."""
    if k % 2:
        raise ValueError(f"odd weight {k}: level-one forms have even weight")
    if k < 0:
        raise ValueError(f"negative weight {k}")
    if k < 12:
        return 0
    d = k // 12
    return d - 1 if k % 12 == 2 else d


def monomial_exponents(k):
    """Exponents (a, b, c) of Delta^a E4^b E6^c with a >= 1 and weight k.

    Ordered by decreasing power of Delta, then decreasing power of E4.
    """
    out = []
    for a in range(k // 12, 0, -1):
        w = k - 12 * a
        for b in range(w // 4, -1, -1):
            r = w - 4 * b
            if r % 6 == 0:
                out.append((a, b, r // 6))
    return out


class _Powers:
    """Memoized integer power tables of Delta, E4, E6 to a fixed truncation."""

    def __init__(self, N):
        self.n = N + 1
        e4 = [1] + [240 * x for x in divisor_sums(N, 3)[1:]]
        e6 = [1] + [-504 * x for x in divisor_sums(N, 5)[1:]]
        self.base = {"D": _delta_ints(N), "E4": e4, "E6": e6}
        self.cache = {}

    def power(self, name, e):
        key = (name, e)
        if key in self.cache:
            return self.cache[key]
        if e == 0:
            val = [1] + [0] * (self.n - 1)
        elif e == 1:
            val = self.base[name]
        else:
            half = self.power(name, e // 2)
            val = int_convolve(half, half, self.n)
            if e % 2:
                val = int_convolve(val, self.base[name], self.n)
        self.cache[key] = val
        return val

    def monomial(self, a, b, c):
        out = self.power("D", a)
        if b:
            out = int_convolve(out, self.power("E4", b), self.n)
        if c:
            out = int_convolve(out, self.power("E6", c), self.n)
        return out


def monomial_rank(k, N):
    """Rank of the cuspidal monomial family of weight k truncated at q^N.

    Fraction-free (Bareiss) elimination over the integers; independent of the
    basis construction in :func:`miller_basis`.
    """
    exps = monomial_exponents(k)
    if not exps:
        return 0
    pw = _Powers(N)
    rows = [pw.monomial(*e)[1:] for e in exps]
    ncols = N
    rank = 0
    prev = 1
    col = 0
    m = [list(r) for r in rows]
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][col]
        for i in range(rank + 1, len(m)):
            f = m[i][col]
            m[i] = [(p * x - f * y) // prev for x, y in zip(m[i], m[rank])]
        prev = p
        rank += 1
        col += 1
    return rank


@dataclass(frozen=True, eq=False)
class CuspSpace:
    """S_k with its Miller basis truncated at q^trunc.

    ``miller[i]`` has coefficient delta_{i+1, j} at q^j for 1 <= j <= dim.
    """

    k: int
    dim: int
    trunc: int
    miller: tuple
    _rows: tuple = field(repr=False, default=())

    @property
    def rows(self):
        """Integer coefficient lists of the basis (the basis is integral)."""
        if self._rows:
            return self._rows
        return tuple([int(c) for c in m.coeffs] for m in self.miller)

    def truncate(self, N):
        if N > self.trunc:
            raise ValueError(f"cannot extend truncation {self.trunc} to {N}")
        rows = tuple(r[: N + 1] for r in self.rows)
        miller = tuple(QSeries.from_ints(self.k, r) for r in rows)
        return CuspSpace(self.k, self.dim, N, miller, rows)

    def coordinates(self, f):
        """Coordinates of a weight-k cusp form in the Miller basis (its a_1..a_dim)."""
        if f.weight != self.k:
            raise ValueError(f"form of weight {f.weight} is not in S_{self.k}")
        return list(f.coeffs[1 : self.dim + 1])


def _basis_choice(k, a):
    # one monomial per Delta power: weight k-12a = 4b + 6c with b <= 2
    w = k - 12 * a
    for b in (0, 1, 2):
        if w - 4 * b >= 0 and (w - 4 * b) % 6 == 0:
            return a, b, (w - 4 * b) // 6
    raise AssertionError(f"no monomial for weight {w}")


def miller_basis(k, N):
    """Echelon basis of S_k truncated at q^N, from Delta^a E4^b E6^c monomials.

    One monomial per Delta power ``a = 1..dim`` is taken (leading term q^a),
    which is unit upper triangular; back substitution then clears the entries
    above each pivot using integer row operations only.
    """
    d = dim_cusp(k)
    if k < 12:
        raise ValueError(f"cusp form spaces need k >= 12, got {k}")
    if N < d + 1:
        raise ValueError(f"truncation {N} too small for S_{k}: need N >= {d + 1}")
    if d == 0:
        return CuspSpace(k, 0, N, (), ())
    pw = _Powers(N)
    rows = [pw.monomial(*_basis_choice(k, a)) for a in range(1, d + 1)]
    for i in range(d - 1, -1, -1):
        gi = rows[i]
        for j in range(i + 1, d):
            c = gi[j + 1]
            if c:
                gj = rows[j]
                gi = [x - c * y for x, y in zip(gi, gj)]
        rows[i] = gi
    for i, r in enumerate(rows):
        assert r[0] == 0 and r[1 : d + 1] == [int(i == j) for j in range(d)]
    miller = tuple(QSeries(k, tuple(Fraction(c) for c in r)) for r in rows)
    return CuspSpace(k, d, N, miller, tuple(rows))


_SPACES = {}
_SPACES_LOCK = threading.Lock()


def cusp_space(k, N):
    """Memoized :func:`miller_basis`; a cached longer truncation is reused."""
    with _SPACES_LOCK:
        cached = _SPACES.get(k)
    if cached is not None and cached.trunc >= N:
        return cached if cached.trunc == N else cached.truncate(N)
    space = miller_basis(k, N)
    with _SPACES_LOCK:
        cur = _SPACES.get(k)
        if cur is None or cur.trunc < N:
            _SPACES[k] = space
    return space
