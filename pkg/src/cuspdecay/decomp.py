"""Quadratic forms of cusp forms and their expansion in a Hecke eigenbasis.

Two normalizations are carried side by side.  ``c`` holds the raw expansion
F = sum_r c_r h_r over Hecke-normalized eigenforms (a_h(1) = 1).  ``inner``
holds <F^, h^> where every eigenform h^ and every constituent of F has unit
Petersson norm, so that |inner|^2 sums to ||F^||^2 (Parseval).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .exactq import QSeries, series_linear, series_mul
from .hecke import hecke_basis
from .analytic import quadrature_truncation
from .space import dim_cusp

__all__ = [
    "Decomposition",
    "QuadraticFormSpec",
    "SpecError",
    "build_quadratic",
    "decompose_spec",
    "hecke_decompose",
    "lp_norm",
    "lp_scan",
    "second_coeff_and_bounds",
    "sparsity_certificate",
]

log = logging.getLogger(__name__)

RESIDUAL_MARGIN = 25


class SpecError(ValueError):
    """A quadratic form specification violates its schema or invariants."""


def _parse_number(x, where):
    if isinstance(x, bool):
        raise SpecError(f"{where}: booleans are not coefficients")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            pass
        try:
            return complex(x.replace(" ", ""))
        except ValueError:
            raise SpecError(f"{where}: cannot parse number {x!r}") from None
    if isinstance(x, (list, tuple)) and len(x) == 2:
        re_, im_ = (_parse_number(v, where) for v in x)
        if im_ == 0:
            return re_
        return complex(float(re_), float(im_))
    raise SpecError(f"{where}: expected a number, a 'p/q' string or [re, im], got {x!r}")


def _num_to_json(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


@dataclass
class QuadraticFormSpec:
    """Q(x_1..x_N) = sum a_{ij} x_i x_j with f_i = sum_r b_{i,r} phi_{k_i, r}.

    ``combos[i]`` is a list of (eigenform index r, b_{i,r}) pairs, r counted
    from 0 in the descending-a(2) ordering of H_{k_i}.
    """

    a: list
    weights: list
    combos: list
    target_weight: int
    max_terms: int | None = None

    @property
    def N(self):
        return len(self.weights)

    def validate(self):
        N = self.N
        if N < 1:
            raise SpecError("a quadratic form needs N >= 1 forms")
        if len(self.a) != N or any(len(row) != N for row in self.a):
            raise SpecError(f"coefficient matrix must be {N}x{N}")
        if len(self.combos) != N:
            raise SpecError(f"need {N} linear combinations, got {len(self.combos)}")
        for i in range(N):
            for j in range(N):
                if self.a[i][j] != self.a[j][i]:
                    raise SpecError(f"a[{i}][{j}] != a[{j}][{i}]: the form must be symmetric")
        for i, k in enumerate(self.weights):
            if k < 12 or k % 2:
                raise SpecError(f"weight k_{i} = {k} must be an even integer >= 12")
        k = self.target_weight
        for i in range(N):
            for j in range(N):
                if self.a[i][j] != 0 and self.weights[i] + self.weights[j] != k:
                    raise SpecError(
                        f"a[{i}][{j}] != 0 but k_{i} + k_{j} = "
                        f"{self.weights[i] + self.weights[j]} != {k}"
                    )
        for i, combo in enumerate(self.combos):
            d = dim_cusp(self.weights[i])
            seen = set()
            nonzero = 0
            for r, b in combo:
                if not 0 <= r < d:
                    raise SpecError(f"form {i}: eigenform index {r} out of range for dim S_{self.weights[i]} = {d}")
                if r in seen:
                    raise SpecError(f"form {i}: eigenform index {r} listed twice")
                seen.add(r)
                nonzero += b != 0
            if self.max_terms is not None and nonzero > self.max_terms:
                raise SpecError(f"form {i} uses {nonzero} eigenforms, more than M = {self.max_terms}")
        return self

    def b_vector(self, i):
        d = dim_cusp(self.weights[i])
        out = [0] * d
        for r, b in self.combos[i]:
            out[r] = b
        return out

    def is_zero(self):
        return all(x == 0 for row in self.a for x in row) or all(
            all(b == 0 for _, b in combo) for combo in self.combos
        )

    # JSON -----------------------------------------------------------------
    @classmethod
    def from_dict(cls, d):
        for key in ("a", "weights", "combos", "target_weight"):
            if key not in d:
                raise SpecError(f"missing required key {key!r}")
        a = [[_parse_number(x, f"a[{i}][{j}]") for j, x in enumerate(row)] for i, row in enumerate(d["a"])]
        combos = []
        for i, combo in enumerate(d["combos"]):
            entries = []
            for t, item in enumerate(combo):
                if isinstance(item, dict):
                    r, b = item.get("r"), item.get("b")
                elif isinstance(item, (list, tuple)) and len(item) == 2:
                    r, b = item
                else:
                    raise SpecError(f"combos[{i}][{t}]: expected [r, b] or {{'r':..,'b':..}}")
                if not isinstance(r, int):
                    raise SpecError(f"combos[{i}][{t}]: eigenform index must be an integer")
                entries.append((r, _parse_number(b, f"combos[{i}][{t}].b")))
            combos.append(entries)
        spec = cls(
            a=a,
            weights=[int(k) for k in d["weights"]],
            combos=combos,
            target_weight=int(d["target_weight"]),
            max_terms=d.get("M"),
        )
        return spec.validate()

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(d, dict):
            raise SpecError("line 1: top-level JSON value must be an object")
        return cls.from_dict(d)

    def to_dict(self):
        out = {
            "a": [[_num_to_json(x) for x in row] for row in self.a],
            "weights": list(self.weights),
            "combos": [[[r, _num_to_json(b)] for r, b in combo] for combo in self.combos],
            "target_weight": self.target_weight,
        }
        if self.max_terms is not None:
            out["M"] = self.max_terms
        return out


def _default_trunc(k, margin=RESIDUAL_MARGIN):
    return dim_cusp(k) + margin


def working_trunc(k, margin=RESIDUAL_MARGIN):
    """Terms needed at weight k for both the residual check and the norm quadrature."""
    return max(dim_cusp(k) + margin, quadrature_truncation(k) + 1)


def _bases_for(spec, N):
    return {k: hecke_basis(k, N) for k in set(spec.weights)}


def _norm_sq(h):
    return h.petersson_norm_sq


def build_quadratic(spec, bases=None, N=None, normalize=False):
    """Q(f_1, ..., f_N) as a q-expansion of weight ``spec.target_weight``.

    With ``normalize`` each f_i is first scaled to unit Petersson norm, using
    ||f_i||^2 = sum_r |b_{i,r}|^2 ||phi_r||^2.
    """
    spec.validate()
    k = spec.target_weight
    N = _default_trunc(k) if N is None else N
    if spec.is_zero():
        return QSeries(k, (Fraction(0),) * (N + 1))
    bases = _bases_for(spec, N) if bases is None else bases
    forms = []
    for i in range(spec.N):
        basis = bases[spec.weights[i]]
        terms = [(b, basis[r].series(N)) for r, b in spec.combos[i] if b != 0]
        if not terms:
            forms.append(None)
            continue
        f = series_linear(terms)
        if normalize:
            with mpmath.workprec(max(h.precision for h in basis)):
                nsq = sum(abs(mpmath.mpmathify(b)) ** 2 * _norm_sq(basis[r])
                          for r, b in spec.combos[i] if b != 0)
                scale = 1 / mpmath.sqrt(nsq)
            f = series_linear([(scale, f)])
        forms.append(f)
    terms = []
    for i in range(spec.N):
        for j in range(i, spec.N):
            coef = spec.a[i][j] if i == j else spec.a[i][j] + spec.a[j][i]
            if coef == 0 or forms[i] is None or forms[j] is None:
                continue
            terms.append((coef, series_mul(forms[i], forms[j])))
    if not terms:
        return QSeries(k, (Fraction(0),) * (N + 1))
    return series_linear(terms)


def second_coeff_and_bounds(spec):
    """Second q-coefficient a of Q and its coefficient bound B.

    a = sum_{i,j} a_ij S_i S_j with S_i = sum_r b_{i,r}, which is the q^2
    coefficient of Q because every eigenform starts with q.  B sums the moduli
    of the coefficients of phi^2 terms and of the cross terms phi_{d1,r1}
    phi_{d2,r2} over ordered pairs of distinct eigenforms.
    """
    spec.validate()
    N = spec.N
    S = [sum((b for _, b in spec.combos[i]), start=0) for i in range(N)]
    a = sum(spec.a[i][j] * S[i] * S[j] for i in range(N) for j in range(N))

    bvec = [spec.b_vector(i) for i in range(N)]
    by_weight = {}
    for i, k in enumerate(spec.weights):
        by_weight.setdefault(k, []).append(i)
    square = 0.0
    for d, idx in by_weight.items():
        for r in range(dim_cusp(d)):
            s = sum(spec.a[i][j] * bvec[i][r] * bvec[j][r] for i in idx for j in idx)
            square += abs(complex(s))
    cross = 0.0
    for d1, idx1 in by_weight.items():
        for d2, idx2 in by_weight.items():
            for r1 in range(dim_cusp(d1)):
                for r2 in range(dim_cusp(d2)):
                    if d1 == d2 and r1 == r2:
                        continue
                    s = sum(spec.a[i][j] * bvec[i][r1] * bvec[j][r2] for i in idx1 for j in idx2)
                    cross += abs(complex(s))
    return a, square + cross


@dataclass
class Decomposition:
    k: int
    c: list
    inner: list
    residual: float
    second_coeff: object = 0
    norm_method: str = "quadrature"
    lp: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.c)

    def c_complex(self):
        return [complex(x) for x in self.c]


def hecke_decompose(F, basis, constituent_norm=1, residual_margin=RESIDUAL_MARGIN,
                    tol=1e-10, norms=None):
    """Expand a weight-k cusp form in the Hecke eigenbasis ``basis``.

    The coefficients c_r solve a_F(n) = sum_r c_r a_{h_r}(n) for n = 1..dim;
    the following ``residual_margin`` coefficients are checked against the
    expansion and a relative mismatch above ``tol`` raises.  ``inner`` is
    c_r ||h_r|| / constituent_norm, i.e. <F, h^> for unit-norm h^ when F was
    built from unit-norm constituents (or divided by their norms).
    """
    k = F.weight
    d = len(basis)
    if d == 0:
        raise ValueError(f"S_{k} is zero-dimensional")
    if any(h.k != k for h in basis):
        raise ValueError(f"basis weight does not match form weight {k}")
    if F.coeffs[0] != 0:
        raise ValueError("only cusp forms (a_0 = 0) can be expanded in a Hecke basis")
    need = d + residual_margin
    if F.trunc < need:
        raise ValueError(f"form known to q^{F.trunc}; decomposition needs q^{need}")
    if basis[0].trunc < need:
        raise ValueError(f"eigenforms known to q^{basis[0].trunc}; decomposition needs q^{need}")
    prec = max(h.precision for h in basis)
    a2 = F.coeffs[2] if F.trunc >= 2 else 0
    method = "quadrature" if norms is None else "supplied"
    if F.is_zero():
        zero = [mpmath.mpf(0)] * d
        return Decomposition(k, zero, list(zero), 0.0, a2, method, {})
    with mpmath.workprec(prec):
        # rows scaled by n^((k-1)/2): entries become lambda_h(n), bounded by d(n)
        A = mpmath.matrix(d, d)
        rhs = mpmath.matrix(d, 1)
        half = mpmath.mpf(k - 1) / 2
        for n in range(1, d + 1):
            s = mpmath.mpf(n) ** half
            for r, h in enumerate(basis):
                A[n - 1, r] = h.a[n] / s
            rhs[n - 1] = mpmath.mpmathify(F.coeffs[n]) / s
        try:
            sol = mpmath.lu_solve(A, rhs)
        except ZeroDivisionError:
            raise ArithmeticError(
                f"eigenform coefficient matrix for S_{k} is numerically singular at {prec} bits"
            ) from None
        c = [sol[r] for r in range(d)]
        worst = mpmath.mpf(0)
        scale = mpmath.mpf(0)
        for n in range(d + 1, need + 1):
            synth = mpmath.fsum(c[r] * basis[r].a[n] for r in range(d))
            fn = mpmath.mpmathify(F.coeffs[n])
            worst = max(worst, abs(fn - synth))
            scale = max(scale, abs(fn) + mpmath.fsum(abs(c[r] * basis[r].a[n]) for r in range(d)))
        residual = float(worst / scale) if scale else 0.0
        if residual > tol:
            raise ArithmeticError(
                f"decomposition residual {residual:.3e} exceeds {tol:.1e} on q^{d + 1}..q^{need}; "
                "truncation or precision is too low"
            )
        if norms is None:
            norms = [_norm_sq(h) for h in basis]
        inner = [c[r] * mpmath.sqrt(norms[r]) / constituent_norm for r in range(d)]
    return Decomposition(k, c, inner, residual, a2, method, {})


def decompose_spec(spec, p_list=(), margin=RESIDUAL_MARGIN, tol=1e-10):
    """Decompose Q from a spec in H_k.

    ``c`` comes from Q built on the given (Hecke-normalized) combinations and
    ``inner`` from Q built on unit-norm constituents; Q itself is not rescaled.
    """
    spec.validate()
    k = spec.target_weight
    d = dim_cusp(k)
    if d == 0:
        raise ValueError(f"S_{k} is zero-dimensional")
    N = max(working_trunc(w, margin) for w in set(spec.weights) | {k})
    if spec.is_zero():
        zero = [mpmath.mpf(0)] * d
        dec = Decomposition(k, zero, list(zero), 0.0, 0)
    else:
        bases = _bases_for(spec, N)
        H = hecke_basis(k, N)
        raw = hecke_decompose(build_quadratic(spec, bases, N), H, residual_margin=margin, tol=tol)
        unit = hecke_decompose(build_quadratic(spec, bases, N, normalize=True), H,
                               residual_margin=margin, tol=tol)
        dec = Decomposition(k, raw.c, unit.inner, max(raw.residual, unit.residual), raw.second_coeff)
    for p in p_list:
        lp_norm(dec, p)
    return dec


def lp_norm(d, p):
    """(sum_r |inner_r|^p)^(1/p)."""
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    vals = [abs(complex(x)) for x in d.inner]
    if not any(vals):
        out = 0.0
    else:
        top = max(vals)
        out = top * sum((v / top) ** p for v in vals) ** (1.0 / p)
    d.lp[p] = out
    return out


def sparsity_certificate(d, L, z0, tol=None, p=1.0):
    """Check whether the expansion has at most L nonzero Hecke coefficients.

    By uniqueness of the expansion an L-sparse representation exists exactly
    when ||c||_0 <= L.  The witness inequality max_r |c_r| >= |a|/(2L) is
    evaluated with the normalized second coefficient a = a_F(2)/2^((k-1)/2)
    (so that |lambda(2)| <= 2 applies).
    """
    cs = [abs(complex(x)) for x in d.c]
    top = max(cs) if cs else 0.0
    tol = 1e-8 * top if tol is None else tol
    nnz = sum(1 for x in cs if x > tol)
    a_arith = complex(d.second_coeff)
    a_norm = abs(a_arith) / 2 ** ((d.k - 1) / 2)
    bound = a_norm / (2 * L)
    lp_val = d.lp.get(p)
    if lp_val is None:
        lp_val = lp_norm(d, p)
    return {
        "k": d.k,
        "L": L,
        "nnz": nnz,
        "sparse_representation_exists": nnz <= L,
        "second_coeff_arithmetic": a_arith,
        "second_coeff_normalized": a_norm,
        "admissible": a_norm >= z0,
        "witness_bound": bound,
        "max_abs_c": top,
        "witness_holds": top >= bound,
        "lp_p": p,
        "lp_value": lp_val,
        "lp_lower_bound": bound,
        "convention": "normalized: a_F(2)/2^((k-1)/2) against lambda(2) with |lambda(2)| <= 2",
    }


def _pair_weights(k):
    return [(k1, k - k1) for k1 in range(12, k // 2 + 1, 2) if dim_cusp(k1) and dim_cusp(k - k1)]


def _unit_product_lp(f, g, H, p_list, margin=RESIDUAL_MARGIN):
    prod = series_mul(f.series(len(H) + margin), g.series(len(H) + margin))
    cn = mpmath.sqrt(_norm_sq(f) * _norm_sq(g))
    dec = hecke_decompose(prod, H, constituent_norm=cn, residual_margin=margin)
    return {p: lp_norm(dec, p) for p in p_list}, dec


def lp_scan(weights, p_list, mode="squares", margin=RESIDUAL_MARGIN):
    """Largest l^p norm of unit-normalized products at each weight.

    ``squares``: max over f in H_{k/2} of ||f^ f^||; ``products``: max over
    f in H_{k1}, g in H_{k2}, k1 + k2 = k, f != g.  One row per (k, p).
    """
    if mode not in ("squares", "products"):
        raise ValueError(f"unknown scan mode {mode!r}")
    rows = []
    for k in weights:
        if k < 24 or k % 2:
            raise ValueError(f"scan weights must be even and >= 24, got {k}")
        dk = dim_cusp(k)
        N = working_trunc(k, margin)
        if mode == "squares":
            if k % 4 or dim_cusp(k // 2) == 0:
                log.info("skipping k=%d: S_%d is empty", k, k // 2)
                continue
            pairs = [(f, f) for f in hecke_basis(k // 2, N)]
        else:
            pairs = []
            for k1, k2 in _pair_weights(k):
                H1, H2 = hecke_basis(k1, N), hecke_basis(k2, N)
                for f in H1:
                    for g in H2:
                        if f is not g:
                            pairs.append((f, g))
            if not pairs:
                log.info("skipping k=%d: no admissible pairs", k)
                continue
        H = hecke_basis(k, N)
        best = {p: (-1.0, None) for p in p_list}
        for f, g in pairs:
            vals, _ = _unit_product_lp(f, g, H, p_list, margin)
            for p in p_list:
                if vals[p] > best[p][0]:
                    best[p] = (vals[p], (f.k, f.index, g.k, g.index))
        for p in p_list:
            val, arg = best[p]
            rows.append({
                "k": k,
                "p": p,
                "mode": mode,
                "value": val,
                "ref_log8": math.log(k) ** (-(2 - p) / 8),
                "ref_log4": math.log(k) ** (-(2 - p) / 4),
                "argmax": arg,
            })
    return rows
