"""Prime sums, Satake combinatorics and moment experiments over H_k.

Everything here works with normalized eigenvalues lambda(n) = a(n)/n^((k-1)/2)
and the real quantities built from them.  Central values L(1/2, f x g x h)
only enter through :func:`watson_surrogate`, a constant-free proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate
from sympy import primerange

from .analytic import sym2_L_at_1
from .decomp import RESIDUAL_MARGIN, hecke_decompose, working_trunc
from .exactq import series_mul
from .hecke import hecke_basis, lambda_prime_power
from .space import dim_cusp

__all__ = [
    "DistReport",
    "Lambda_triple",
    "MomentRow",
    "TripleContext",
    "chandee_sum",
    "D_coeff",
    "default_V_grid",
    "dist_report",
    "gaussian_identity_check",
    "hecke_relation_residual",
    "lambda_power_expand_check",
    "moment_2r_check",
    "moment_sum",
    "power_sum",
    "prime_sums_report",
    "soundararajan_P",
    "watson_surrogate",
]


# combinatorics --------------------------------------------------------------

def D_coeff(k, l):
    """D_{k,l} = k!(l+1) / (((k+l)/2 + 1)! ((k-l)/2)!), exactly."""
    if k < 0 or l < 0 or l > k:
        raise ValueError(f"need 0 <= l <= k, got k={k}, l={l}")
    if (k - l) % 2:
        raise ValueError(f"k={k} and l={l} must have the same parity")
    return Fraction(math.factorial(k) * (l + 1),
                    math.factorial((k + l) // 2 + 1) * math.factorial((k - l) // 2))


def lambda_power_expand_check(k, lambda_p, prec=128):
    """|lambda^k - sum_l D_{k,l} lambda(p^l)|.

    Rational input is evaluated exactly and returns a Fraction; anything else
    runs in mpmath at ``prec`` bits.
    """
    if k > 30:
        raise ValueError("expansion check is limited to k <= 30")
    ls = range(k % 2, k + 1, 2)
    if isinstance(lambda_p, (int, Fraction)) and not isinstance(lambda_p, bool):
        lam = Fraction(lambda_p)
        return abs(lam ** k - sum(D_coeff(k, l) * lambda_prime_power(lam, l) for l in ls))
    with mpmath.workprec(prec):
        lam = mpmath.mpf(lambda_p)
        s = mpmath.fsum(mpmath.mpf(D_coeff(k, l).numerator) / D_coeff(k, l).denominator
                        * lambda_prime_power(lam, l) for l in ls)
        return abs(lam ** k - s)


def power_sum(lam, n):
    """alpha^n + beta^n for the Satake pair of lambda (real for real lambda)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    prev, cur = 2 + 0 * lam, lam
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, lam * cur - prev
    return cur


def _lam_p(form, p):
    return form.lam[p] if hasattr(form, "lam") else form


def Lambda_triple(f, g, h, p, n):
    """(alpha_f^n + beta_f^n)(alpha_g^n + beta_g^n)(alpha_h^n + beta_h^n) at p.

    f, g, h may be eigenforms or bare lambda(p) values.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return power_sum(_lam_p(f, p), n) * power_sum(_lam_p(g, p), n) * power_sum(_lam_p(h, p), n)


def hecke_relation_residual(f, g, h, P=997):
    """max_p |Lambda(p^2) - prod(lambda_sym2(p) - 1)| over primes p <= P."""
    worst = 0.0
    for p in primerange(2, P + 1):
        lhs = Lambda_triple(f, g, h, p, 2)
        rhs = 1.0
        for form in (f, g, h):
            rhs *= (_lam_p(form, p) ** 2 - 1) - 1
        worst = max(worst, abs(lhs - rhs))
    return worst


# Dirichlet polynomials ------------------------------------------------------

@dataclass
class TripleContext:
    f: object
    g: object
    H: list
    x: float
    l: float = 1.0

    def __post_init__(self):
        for form in (self.f, self.g):
            if form.k < 12 or form.k % 2:
                raise ValueError(f"constituent weight {form.k} must be even and >= 12")
        if self.l < 0:
            raise ValueError("l must be >= 0")
        if self.x < 2:
            raise ValueError("x must be >= 2")
        need = int(self.x)
        for form in [self.f, self.g] + list(self.H[:1]):
            if form.trunc < need:
                raise ValueError(f"eigenform of weight {form.k} known to {form.trunc} < x = {need}")

    @property
    def k(self):
        return self.f.k + self.g.k

    @property
    def sigma_sq(self):
        return self.l ** 2 * math.log(math.log(self.k))

    def primes(self, y=None):
        y = self.x if y is None else y
        return np.array(list(primerange(2, int(math.floor(y)) + 1)), dtype=np.int64)


def chandee_sum(ctx, h):
    """sum_{p^n <= x} Lambda(p^n) / (n p^(n(1/2 + 1/log x))) * log(x/p^n)/log x."""
    x = ctx.x
    if x <= 10:
        raise ValueError("the majorant is stated for x > 10")
    lx = math.log(x)
    terms = []
    for p in ctx.primes():
        pn, n = p, 1
        while pn <= x:
            lam = Lambda_triple(ctx.f, ctx.g, h, p, n)
            terms.append(lam / (n * float(p) ** (n * (0.5 + 1 / lx))) * math.log(x / pn) / lx)
            pn *= p
            n += 1
    return math.fsum(terms)


def _P_weights(ps, x):
    lx = math.log(x)
    return ps ** -(0.5 + 1 / lx) * (1 - np.log(ps) / lx)


def soundararajan_P(h, ctx, y=None):
    """P(h; x, y) = sum_{p<=y} l lam_f lam_g lam_h / p^(1/2+1/log x) (1 - log p/log x)."""
    y = ctx.x if y is None else y
    if y < 2:
        raise ValueError(f"y = {y} < 2")
    if y > ctx.x:
        raise ValueError(f"y = {y} exceeds x = {ctx.x}")
    ps = ctx.primes(y)
    if len(ps) == 0:
        return 0.0
    vals = ctx.l * ctx.f.lam[ps] * ctx.g.lam[ps] * h.lam[ps] * _P_weights(ps.astype(float), ctx.x)
    return math.fsum(vals.tolist())


def default_V_grid(k):
    s = math.sqrt(math.log(math.log(k)))
    return [s * j / 4 for j in range(1, 13)]


@dataclass
class DistReport:
    samples: list
    mean: float
    variance: float
    predicted_variance: float
    predicted_variance_smoothed: float
    tail_counts: dict
    params: dict
    window: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.samples)

    def tail_fraction(self, V):
        return sum(1 for s in self.samples if s > V) / self.dim


def dist_report(ctx, y=None, V_grid=None):
    """Empirical distribution of P(h; x, y) over H_k against its prediction.

    ``predicted_variance`` is sum_{p<=x} (l lam_f(p) lam_g(p))^2 / p; the
    smoothed variant carries the same p^(-1/log x)(1 - log p/log x) weight as
    P itself, which is the variance the harmonic average actually predicts.
    """
    if not ctx.H:
        raise ValueError("empty eigenbasis")
    y = ctx.x if y is None else y
    samples = [soundararajan_P(h, ctx, y) for h in ctx.H]
    arr = np.array(samples)
    ps = ctx.primes().astype(float)
    pi = ps.astype(np.int64)
    ap = ctx.l * ctx.f.lam[pi] * ctx.g.lam[pi]
    raw = float(np.sum(ap ** 2 / ps))
    smooth = float(np.sum(ap ** 2 * _P_weights(ps, ctx.x) ** 2))
    V_grid = default_V_grid(ctx.k) if V_grid is None else list(V_grid)
    tails = {float(V): int(np.sum(arr > V)) for V in V_grid}

    # window y_w < p <= x against l^2 log(log x/log y_w)
    llk = math.log(math.log(ctx.k))
    yw = ctx.x ** (1 / llk) if llk > 1 else 2.0
    yw = max(2.0, yw)
    win = ps[ps > yw]
    wi = win.astype(np.int64)
    s2f = ctx.f.lam[wi] ** 2 - 1
    s2g = ctx.g.lam[wi] ** 2 - 1
    wsum = float(np.sum(ctx.l ** 2 * s2f ** 2 * s2g ** 2 / win))
    wref = ctx.l ** 2 * math.log(math.log(ctx.x) / math.log(yw)) if yw < ctx.x else 0.0
    return DistReport(
        samples=samples,
        mean=float(arr.mean()),
        variance=float(arr.var()),
        predicted_variance=raw,
        predicted_variance_smoothed=smooth,
        tail_counts=tails,
        params={"k": ctx.k, "k1": ctx.f.k, "k2": ctx.g.k, "l": ctx.l, "x": ctx.x, "y": y,
                "V_grid": [float(v) for v in V_grid], "precision": ctx.H[0].precision},
        window={"y": yw, "sum": wsum, "reference": wref, "logloglog_k": math.log(llk) if llk > 1 else 0.0},
    )


def prime_sums_report(f, g, h, x):
    """The seven partial sums over p <= x of lambda_sym2 products divided by p."""
    if x < 2:
        raise ValueError("x must be >= 2")
    ps = np.array(list(primerange(2, int(math.floor(x)) + 1)), dtype=np.int64)
    sf, sg, sh = (form.lam[ps] ** 2 - 1 for form in (f, g, h))
    inv = 1.0 / ps

    def s(v):
        return math.fsum((v * inv).tolist())

    k1, k2 = f.k, g.k
    forms = [(f.k, f.index), (g.k, g.index), (h.k, h.index)]
    flags = []
    if len(set(forms)) < 3:
        flags.append("f, g, h are not distinct")
    if h.k in (f.k, g.k):
        flags.append("h shares a weight with a constituent")
    return {
        "fgh": s(sf * sg * sh),
        "fg": s(sf * sg),
        "fh": s(sf * sh),
        "gh": s(sg * sh),
        "f": s(sf),
        "g": s(sg),
        "h": s(sh),
        "x": x,
        "logloglog_k": math.log(math.log(math.log(k1 + k2))),
        "logloglog_k1": math.log(math.log(math.log(k1))) if k1 > 15 else float("nan"),
        "logloglog_k2": math.log(math.log(math.log(k2))) if k2 > 15 else float("nan"),
        "flags": flags,
    }


# central value proxy --------------------------------------------------------

def watson_surrogate(inner, k, L_f, L_g, L_h):
    """(k1+k2) |<f^ g^, h^>|^2 L(1,sym^2 f) L(1,sym^2 g) L(1,sym^2 h)."""
    return k * abs(complex(inner)) ** 2 * L_f * L_g * L_h


@dataclass
class MomentRow:
    k: int
    l: float
    dim: int
    moment: float
    reference: float
    mu: float
    V_grid: list
    B: list
    histogram: list
    ibp_residual: float
    pair: tuple


def _default_pair(k, N):
    k1 = 12
    k2 = k - k1
    if dim_cusp(k2) == 0:
        return None
    return hecke_basis(k1, N)[0], hecke_basis(k2, N)[0]


def moment_sum(l, weights, P=1000, eps=0.1, V_grid=None, pair_fn=None):
    """(1/k) sum_h surrogate(h)^l per weight, with B(V + mu) counts.

    The default pair is f = Delta and g the eigenform of weight k - 12 with
    the largest a(2).  ``ibp_residual`` compares sum_h L(h) with the
    integral of e^V B(V) over the sample range, evaluated on the step function.
    """
    if l <= 0:
        raise ValueError("l must be positive")
    rows = []
    for k in weights:
        if dim_cusp(k) == 0:
            continue
        N = max(P, working_trunc(k))
        pair = (pair_fn or _default_pair)(k, N)
        if pair is None:
            continue
        f, g = pair
        H = hecke_basis(k, N)
        M = dim_cusp(k) + RESIDUAL_MARGIN
        prod = series_mul(f.series(M), g.series(M))
        cn = mpmath.sqrt(f.petersson_norm_sq * g.petersson_norm_sq)
        dec = hecke_decompose(prod, H, constituent_norm=cn)
        Lf, Lg = f.l_sym2_at_1, g.l_sym2_at_1
        surr = [watson_surrogate(dec.inner[r], k, Lf, Lg, h.l_sym2_at_1) for r, h in enumerate(H)]
        logs = np.array([l * math.log(s) if s > 0 else -math.inf for s in surr])
        moment = math.fsum(s ** l for s in surr) / k
        llk = math.log(math.log(k))
        mu = (-0.5 + eps) * l * llk
        grid = default_V_grid(k) if V_grid is None else list(V_grid)
        B = [int(np.sum(logs > V + mu)) for V in grid]
        edges = [-math.inf] + [V + mu for V in grid] + [math.inf]
        hist = [int(np.sum((logs > lo) & (logs <= hi))) for lo, hi in zip(edges[:-1], edges[1:])]
        finite = np.sort(logs[np.isfinite(logs)])
        if len(finite):
            # integral of e^V B(V) over (-inf, max]; B is a step function
            lo = -math.inf
            integral = 0.0
            for i, v in enumerate(finite):
                count = len(finite) - i
                integral += count * (math.exp(v) - (math.exp(lo) if np.isfinite(lo) else 0.0))
                lo = v
            total = math.fsum(np.exp(finite).tolist())
            ibp = abs(integral - total) / total
        else:
            ibp = 0.0
        rows.append(MomentRow(k, l, len(H), moment, math.log(k) ** (l * (l - 1) / 2), mu,
                              grid, B, hist, ibp, ((f.k, f.index), (g.k, g.index))))
    return rows


def gaussian_identity_check(sigma=1.0):
    """Quadrature of exp(-x^2/(2 sigma^2) + x) against sqrt(2 pi) sigma e^(sigma^2/2)."""
    val, _ = integrate.quad(lambda t: math.exp(-t * t / (2 * sigma * sigma) + t),
                            -math.inf, math.inf, epsabs=0, epsrel=1e-13)
    exact = math.sqrt(2 * math.pi) * sigma * math.exp(sigma * sigma / 2)
    return val, exact, abs(val - exact) / exact


# even moments of short prime sums --------------------------------------------

def _cap_ok(p, a):
    return abs(a) <= 8 * p ** 0.125


def moment_2r_check(r, k, x, a_p, basis=None, enforce=True, P=1000):
    """Sum over H_k of (sum_{p<=x} a_p lam_h(p)/sqrt p)^(2r) against its scale.

    ``a_p`` is a callable or a mapping prime -> real.  L(1, sym^2 h) in the
    weights uses primes up to ``P`` (or the basis truncation if shorter).  Returns a dict with the
    unweighted sum, the 1/L(1, sym^2 h)-weighted sum, the scale
    ((2r)!/(r! 2^r)) k (sum a_p^2/p)^r and both ratios lhs/(scale (log log k)^3).
    A ratio is 0 when both sides vanish.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    limit = k ** (1.0 / (10 * r))
    if enforce and x > limit * (1 + 1e-12):
        raise ValueError(f"x = {x} exceeds k^(1/(10r)) = {limit:.6g}")
    ps = list(primerange(2, int(math.floor(x)) + 1))
    get = a_p if callable(a_p) else (lambda p: a_p.get(p, 0.0))
    coef = [float(get(p)) for p in ps]
    for p, a in zip(ps, coef):
        if not _cap_ok(p, a):
            raise ValueError(f"|a_{p}| = {abs(a):.4g} exceeds the cap 8 p^(1/8)")
    if basis is None:
        basis = hecke_basis(k, max(P, int(x) + 1))
    sums = []
    for h in basis:
        sums.append(math.fsum(a * h.lam[p] / math.sqrt(p) for p, a in zip(ps, coef)))
    lhs = math.fsum(s ** (2 * r) for s in sums)
    if ps:
        Ls = [sym2_L_at_1(h, min(P, h.trunc)).value for h in basis]
        weighted = math.fsum(s ** (2 * r) / L for s, L in zip(sums, Ls))
    else:
        weighted = 0.0
    comb = math.factorial(2 * r) / (math.factorial(r) * 2 ** r)
    scale = comb * k * math.fsum(a * a / p for p, a in zip(ps, coef)) ** r
    denom = scale * math.log(math.log(k)) ** 3

    def ratio(v):
        if v == 0 and denom == 0:
            return 0.0
        return v / denom if denom else math.inf

    return {
        "r": r, "k": k, "x": x, "primes": len(ps),
        "lhs": lhs, "lhs_weighted": weighted, "rhs_scale": scale,
        "ratio": ratio(lhs), "ratio_weighted": ratio(weighted),
        "vacuous": not ps,
    }
