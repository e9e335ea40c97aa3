from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspdecay._kronecker import int_convolve
from cuspdecay.exactq import QSeries, constant_one, delta, eisenstein, series_linear, series_mul

TAU = [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def naive(a, b, n):
    return [sum(a[i] * b[m - i] for i in range(m + 1)) for m in range(n)]


def test_delta_first_coefficients():
    d = delta(10)
    assert [int(c) for c in d.coeffs] == TAU
    assert d.weight == 12 and d.exact


def test_eisenstein_values():
    assert [int(c) for c in eisenstein(4, 3).coeffs] == [1, 240, 2160, 6720]
    assert [int(c) for c in eisenstein(6, 3).coeffs] == [1, -504, -16632, -122976]
    with pytest.raises(ValueError, match="4 and 6"):
        eisenstein(8, 5)


def test_e4_squared_minus_e8_is_zero_relation():
    # E4^3 - E6^2 = 1728 Delta
    N = 30
    lhs = eisenstein(4, N) ** 3 - eisenstein(6, N) ** 2
    assert lhs.equals(series_linear([(1728, delta(N))]))


def test_truncation_is_min_and_weights_add():
    a, b = delta(8), eisenstein(4, 5)
    p = a * b
    assert p.trunc == 5 and p.weight == 16


def test_mixed_weight_linear_combination_rejected():
    with pytest.raises(ValueError, match="different weights"):
        delta(5) + eisenstein(4, 5)


def test_json_round_trip():
    s = series_linear([(Fraction(1, 3), delta(12))])
    back = QSeries.from_json(s.to_json())
    assert back.equals(s) and back.weight == 12
    with pytest.raises(ValueError):
        QSeries.from_dict({"weight": 12, "trunc": 3, "coeffs": ["0/1", "1/1"]})


def test_numeric_series_mul_matches_exact():
    d = delta(20)
    num = QSeries(12, tuple(mpmath.mpf(int(c)) for c in d.coeffs))
    exact = series_mul(d, d)
    approx = series_mul(num, num)
    assert all(abs(mpmath.mpf(int(x)) - y) == 0 for x, y in zip(exact.coeffs, approx.coeffs))


def test_power_and_one():
    assert (delta(6) ** 0).equals(constant_one(6))
    assert (delta(10) ** 2).coeffs[2:4] == (1, -48)


ints = st.lists(st.integers(-10 ** 30, 10 ** 30), min_size=1, max_size=40)


@settings(max_examples=60, deadline=None)
@given(ints, ints)
def test_kronecker_matches_naive(a, b):
    n = min(len(a), len(b))
    assert int_convolve(a, b, n) == naive(a, b, n)


@settings(max_examples=40, deadline=None)
@given(ints, ints, ints)
def test_series_product_commutative_associative(a, b, c):
    n = min(len(a), len(b), len(c))
    A, B, C = (QSeries.from_ints(0, x[:n]) for x in (a, b, c))
    assert series_mul(A, B).equals(series_mul(B, A))
    assert series_mul(series_mul(A, B), C).equals(series_mul(A, series_mul(B, C)))


_BIG = delta(3600)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 60), st.integers(2, 60))
def test_tau_multiplicative(m, n):
    from math import gcd

    d = _BIG
    if gcd(m, n) == 1:
        assert d[m * n] == d[m] * d[n]
    # Hecke recurrence at p = 2: tau(2^(j+1)) = tau(2) tau(2^j) - 2^11 tau(2^(j-1))
    assert d[8] == d[2] * d[4] - 2 ** 11 * d[2]
