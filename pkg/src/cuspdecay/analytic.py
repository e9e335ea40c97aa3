"""Petersson norms, L(1, sym^2 h) and the Petersson-formula check.

Two independent routes to <h, h> are provided.  The quadrature route
integrates y^k |f|^2 over the standard fundamental domain; the sym^2 route
multiplies L(1, sym^2 h) by the gamma-factor constant

    C(k) = Gamma(k) / (2 pi^2 (4 pi)^(k-1)),

rescaled once by a calibration factor measured against the quadrature route
for Delta.  All magnitudes are handled in log space: Petersson norms of
weight-600 forms are far outside the float64 range, so norms are returned as
mpmath numbers.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import mpmath
import numpy as np

__all__ = [
    "LValue",
    "NormResult",
    "gamma_factor_constant",
    "petersson_delta_check",
    "petersson_norm_quadrature",
    "petersson_norm_sym2",
    "quadrature_truncation",
    "sym2_L_at_1",
    "sym2_calibration",
]

DEFAULT_PRIME_CUTOFF = 10_000
Y_MIN = math.sqrt(3) / 2


@dataclass(frozen=True)
class NormResult:
    value: mpmath.mpf
    method: str
    est_error: float
    calibration: float | None = None
    note: str = ""

    def __post_init__(self):
        if self.method not in ("quadrature", "sym2-route"):
            raise ValueError(f"unknown norm method {self.method!r}")
        if not self.value > 0:
            raise ValueError("Petersson norm must be positive")
        if self.est_error < 0:
            raise ValueError("error estimate must be nonnegative")


@dataclass(frozen=True)
class LValue:
    value: float
    cutoff_P: int
    tail_estimate: float


def gamma_factor_constant(k):
    """C(k) with <h, h> = C(k) L(1, sym^2 h) for normalized eigenforms of level one."""
    k = mpmath.mpf(k)
    return mpmath.gamma(k) / (2 * mpmath.pi ** 2 * (4 * mpmath.pi) ** (k - 1))


# quadrature -----------------------------------------------------------------

def _log_abs(c):
    if c == 0:
        return -math.inf
    return float(mpmath.log(abs(mpmath.mpmathify(c) if not isinstance(c, (mpmath.mpf, mpmath.mpc)) else c)))


def _normalized(f):
    """Phases and log-moduli of a_n / n^((k-1)/2) for n >= 1."""
    k = f.weight
    half = (k - 1) / 2
    n = np.arange(1, f.trunc + 1)
    logs = np.empty(f.trunc)
    phase = np.empty(f.trunc, dtype=complex)
    for i in range(f.trunc):
        c = f.coeffs[i + 1]
        if c == 0:
            logs[i] = -np.inf
            phase[i] = 0
            continue
        c = mpmath.mpmathify(c) if not isinstance(c, (mpmath.mpf, mpmath.mpc)) else c
        logs[i] = float(mpmath.log(abs(c))) - half * math.log(i + 1)
        ph = c / abs(c)
        phase[i] = complex(ph)
    return n, logs, phase


def _term_log(k, n, y):
    """log of n^((k-1)/2) y^(k/2) e^(-2 pi n y)."""
    return (k - 1) / 2 * np.log(n) + k / 2 * np.log(y) - 2 * np.pi * n * y


def quadrature_truncation(k, eps=1e-24, growth=0.0):
    """Smallest N so that terms n > N of a weight-k form with normalized
    coefficients of size <= n^(1+growth) are below eps times the largest term
    anywhere on y >= sqrt(3)/2."""
    nstar = max(1.0, (k - 1) / (4 * np.pi * Y_MIN))
    top = max(_term_log(k, np.array([max(1.0, math.floor(nstar)), math.ceil(nstar)]), Y_MIN))
    N = int(math.ceil(nstar))
    while True:
        n = np.arange(N + 1, N + 60, dtype=float)
        tail = _term_log(k, n, Y_MIN) + (1 + growth) * np.log(n)
        if np.logaddexp.reduce(tail - top) < math.log(eps) and N >= 2:
            return N
        N += 1


def _pocket(k, n, logs, phase, shift, order):
    """Gauss-Legendre tensor rule on |x| <= 1/2, sqrt(1-x^2) <= y <= 1."""
    gx, wx = np.polynomial.legendre.leggauss(order)
    xs = gx / 2
    wxs = wx / 2
    keep = np.isfinite(logs)
    n, logs, phase = n[keep], logs[keep], phase[keep]
    total = 0.0
    for x, w in zip(xs, wxs):
        y0 = math.sqrt(1 - x * x)
        ys = y0 + (1 - y0) * (gx + 1) / 2
        wy = wx * (1 - y0) / 2
        ex = _term_log(k, n[None, :], ys[:, None]) + logs[None, :] - shift
        vals = (np.exp(ex) * phase[None, :]) @ np.exp(2j * np.pi * n * x)
        total += w * np.sum(wy * np.abs(vals) ** 2 / ys ** 2)
    return total


def petersson_norm_quadrature(f, target=1e-6, eigen=False, max_order=512):
    """<f, f> by direct integration over the fundamental domain.

    The strip y >= 1 is summed in closed form from Fourier orthogonality,
    sum_n |a_n|^2 Gamma(k-1, 4 pi n)/(4 pi n)^(k-1); the pocket under y = 1
    is integrated with a tensor Gauss-Legendre rule whose order doubles until
    two consecutive orders agree to ``target`` relative.  ``eigen=True``
    allows the Deligne growth model for the truncation check; otherwise the
    growth of the supplied coefficients is estimated from the series itself.
    """
    k = f.weight
    if k < 12:
        raise ValueError(f"no cusp forms of weight {k}")
    if f.coeffs[0] != 0:
        raise ValueError("Petersson norm quadrature needs a cusp form (a_0 = 0)")
    n, logs, phase = _normalized(f)
    if not np.isfinite(logs).any():
        raise ValueError("zero form has no positive norm")
    # size of normalized coefficients relative to n
    finite = np.isfinite(logs)
    growth_scale = float(np.max(logs[finite] - np.log(n[finite])))
    growth = 0.0 if eigen else max(0.0, growth_scale)
    need = quadrature_truncation(k, eps=min(1e-24, target * 1e-12), growth=growth)
    if f.trunc < need:
        raise ValueError(
            f"truncation {f.trunc} insufficient for weight-{k} quadrature: need N >= {need}"
        )
    shift = float(np.max(_term_log(k, n[finite], Y_MIN) + logs[finite]))
    shift = max(shift, float(np.max(_term_log(k, n[finite], 1.0) + logs[finite])))

    # strip: closed form, in the same scaled units exp(2 * shift)
    strip = mpmath.mpf(0)
    with mpmath.workdps(30):
        for nn, lg in zip(n[finite], logs[finite]):
            x = 4 * mpmath.pi * int(nn)
            term = (2 * lg + (k - 1) * math.log(nn) - 2 * shift
                    + mpmath.log(mpmath.gammainc(k - 1, x)) - (k - 1) * mpmath.log(x))
            strip += mpmath.exp(term)
    strip = float(strip)

    order = 24
    prev = _pocket(k, n, logs, phase, shift, order)
    err = math.inf
    while order < max_order:
        order *= 2
        cur = _pocket(k, n, logs, phase, shift, order)
        err = abs(cur - prev)
        prev = cur
        if err <= target * 0.1 * (cur + strip):
            break
    total = strip + prev
    value = mpmath.mpf(total) * mpmath.exp(2 * mpmath.mpf(shift))
    rel_err = err / total if total > 0 else math.inf
    return NormResult(value=value, method="quadrature", est_error=float(rel_err * value),
                      note=f"order={order}, N={f.trunc}")


# L(1, sym^2 h) ----------------------------------------------------------------

def sym2_L_at_1(h, P=None):
    """Euler product for L(1, sym^2 h) over primes p <= P.

    The tail p > P is not bounded in the worst case (the product converges
    only conditionally), so ``tail_estimate`` uses equidistributed Satake
    angles: lambda(p^2)/p has mean 0 and variance 1/p^2 for each prime.
    """
    P = min(DEFAULT_PRIME_CUTOFF, h.trunc) if P is None else int(P)
    if P < 100:
        raise ValueError(f"prime cutoff P={P} too small (tail dominates); need P >= 100")
    if P > h.trunc:
        raise ValueError(f"eigenform coefficients known to {h.trunc}, Euler product asks for P={P}")
    ps, alpha, beta = h.satake_arrays(P)
    inv = 1.0 / ps
    fac = (1 - alpha ** 2 * inv) * (1 - inv) * (1 - beta ** 2 * inv)
    logL = -np.sum(np.log(fac.real))
    value = float(np.exp(logL))
    s2 = 1.0 / (P * math.log(P))
    tail = value * (math.sqrt(s2) + 4 * s2)
    return LValue(value=value, cutoff_P=int(ps[-1]), tail_estimate=tail)


_CALIB = {}
_CALIB_LOCK = threading.Lock()


def sym2_calibration(P=DEFAULT_PRIME_CUTOFF):
    """Ratio quadrature / (C(12) L(1, sym^2 Delta)) measured at weight 12."""
    with _CALIB_LOCK:
        if P in _CALIB:
            return _CALIB[P]
    from .hecke import hecke_basis

    delta_form = hecke_basis(12, max(P, 40))[0]
    quad = petersson_norm_quadrature(delta_form.series(40), eigen=True, target=1e-8)
    lval = sym2_L_at_1(delta_form, P)
    ratio = float(quad.value / (gamma_factor_constant(12) * lval.value))
    with _CALIB_LOCK:
        _CALIB[P] = ratio
    return ratio


def petersson_norm_sym2(h, P=None, calibration=None):
    """<h, h> = calibration * C(k) * L(1, sym^2 h)."""
    lval = sym2_L_at_1(h, P)
    if calibration is None:
        try:
            calibration = sym2_calibration(lval.cutoff_P if lval.cutoff_P >= 100 else DEFAULT_PRIME_CUTOFF)
        except Exception as exc:  # pragma: no cover - exercised via the error path test
            raise RuntimeError(f"sym2 calibration unavailable: {exc}") from exc
    value = calibration * gamma_factor_constant(h.k) * lval.value
    rel = lval.tail_estimate / lval.value + abs(calibration - 1)
    return NormResult(
        value=value,
        method="sym2-route",
        est_error=float(rel * value),
        calibration=float(calibration),
        note=f"calibrated against quadrature of Delta; P={lval.cutoff_P}",
    )


# Petersson formula ----------------------------------------------------------

def petersson_delta_check(k, m, n, basis=None, P=None, strict=True):
    """(2 pi^2/(k-1)) sum_h lambda_h(m) lambda_h(n) / L(1, sym^2 h).

    With ``strict`` the range mn <= k^2/10^4 is enforced; outside it the sum
    is still computed but no longer compared with delta_{m=n} by the caller.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if strict and m * n * 10 ** 4 > k * k:
        raise ValueError(f"mn = {m * n} exceeds k^2/10^4 = {k * k / 1e4:g}")
    if basis is None:
        from .hecke import hecke_basis

        P_eff = DEFAULT_PRIME_CUTOFF if P is None else int(P)
        basis = hecke_basis(k, max(P_eff, m, n))
    total = 0.0
    for h in basis:
        L = sym2_L_at_1(h, P).value
        total += h.lam[m] * h.lam[n] / L
    return 2 * math.pi ** 2 / (k - 1) * total
