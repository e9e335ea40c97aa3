import math
from fractions import Fraction

import pytest

from cuspdecay.analytic import petersson_delta_check
from cuspdecay.hecke import hecke_basis
from cuspdecay.moments import (
    D_coeff,
    Lambda_triple,
    TripleContext,
    chandee_sum,
    default_V_grid,
    dist_report,
    gaussian_identity_check,
    hecke_relation_residual,
    lambda_power_expand_check,
    moment_2r_check,
    moment_sum,
    power_sum,
    prime_sums_report,
    soundararajan_P,
    watson_surrogate,
)


@pytest.fixture(scope="module")
def small_triple():
    f = hecke_basis(12, 400)[0]
    g = hecke_basis(16, 400)[0]
    H = hecke_basis(28, 400)
    return f, g, H


def test_D_values():
    assert D_coeff(2, 0) == 1 and D_coeff(2, 2) == 1
    assert D_coeff(4, 0) == 2 and D_coeff(4, 2) == 3
    for k in range(12):
        assert D_coeff(k, k) == 1
    with pytest.raises(ValueError):
        D_coeff(5, 2)
    with pytest.raises(ValueError):
        D_coeff(3, 5)


def test_power_expansion_exact():
    for k in range(1, 21):
        for lam in (Fraction(0), Fraction(1, 3), Fraction(-7, 5), Fraction(2)):
            assert lambda_power_expand_check(k, lam) == 0


def test_power_expansion_float():
    assert lambda_power_expand_check(12, 1.2) <= 1e-20
    with pytest.raises(ValueError):
        lambda_power_expand_check(31, 0.5)


def test_power_sums():
    assert power_sum(2.0, 5) == 2.0
    assert power_sum(0.0, 2) == -2.0
    assert power_sum(1.0, 3) == -2.0  # primitive sixth roots of unity
    assert Lambda_triple(2.0, 2.0, 2.0, 2, 2) == 8.0


def test_hecke_relation(small_triple):
    f, g, H = small_triple
    assert hecke_relation_residual(f, g, H[0], P=397) <= 1e-10


def test_context_validation(small_triple):
    f, g, H = small_triple
    with pytest.raises(ValueError, match="known to"):
        TripleContext(f, g, H, 1000.0)
    with pytest.raises(ValueError):
        TripleContext(f, g, H, 50.0, l=-1)


def test_chandee_sum(small_triple):
    f, g, H = small_triple
    ctx = TripleContext(f, g, H, 100.0)
    vals = [chandee_sum(ctx, h) for h in H]
    assert all(math.isfinite(v) for v in vals)
    with pytest.raises(ValueError, match="x > 10"):
        chandee_sum(TripleContext(f, g, H, 10.0), H[0])


def test_P_properties(small_triple):
    f, g, H = small_triple
    ctx = TripleContext(f, g, H, 200.0, l=1.0)
    assert soundararajan_P(H[0], TripleContext(f, g, H, 200.0, l=0.0)) == 0.0
    twice = TripleContext(f, g, H, 200.0, l=2.0)
    assert soundararajan_P(H[0], twice) == pytest.approx(2 * soundararajan_P(H[0], ctx))
    with pytest.raises(ValueError):
        soundararajan_P(H[0], ctx, y=1.5)
    with pytest.raises(ValueError):
        soundararajan_P(H[0], ctx, y=300)


def test_dist_report(small_triple):
    f, g, H = small_triple
    rep = dist_report(TripleContext(f, g, H, 300.0))
    assert rep.dim == len(H)
    counts = [rep.tail_counts[V] for V in sorted(rep.tail_counts)]
    assert counts == sorted(counts, reverse=True)
    assert rep.tail_fraction(-1e9) == 1.0
    assert rep.predicted_variance > rep.predicted_variance_smoothed > 0
    assert default_V_grid(28) == sorted(default_V_grid(28))


def test_prime_sums_report(small_triple):
    f, g, H = small_triple
    rep = prime_sums_report(f, g, H[0], 300)
    assert set(rep) >= {"fgh", "fg", "fh", "gh", "f", "g", "h"}
    assert all(math.isfinite(rep[key]) for key in ("fgh", "fg", "f"))
    assert "f, g, h are not distinct" in prime_sums_report(f, f, H[0], 300)["flags"]


def test_watson_surrogate():
    assert watson_surrogate(0.5, 24, 1, 2, 3) == pytest.approx(24 * 0.25 * 6)
    assert watson_surrogate(0.5j, 24, 1, 1, 1) == watson_surrogate(-0.5, 24, 1, 1, 1)
    assert watson_surrogate(0, 24, 1, 1, 1) == 0


def test_moment_sum_rows():
    rows = moment_sum(1.0, [24, 26, 36], P=500)
    assert [r.k for r in rows] == [24, 36]
    for r in rows:
        assert r.moment > 0 and r.dim == len(hecke_basis(r.k, 500))
        assert r.B == sorted(r.B, reverse=True)
        assert sum(r.histogram) == r.dim
        assert r.ibp_residual < 1e-9
    with pytest.raises(ValueError):
        moment_sum(0, [24])


def test_gaussian_identity():
    for s in (0.5, 1.0, 2.0):
        _, _, rel = gaussian_identity_check(s)
        assert rel <= 1e-10


def test_moment_2r_zero_coefficients():
    out = moment_2r_check(1, 200, 50, lambda p: 0.0, enforce=False, P=2000)
    assert out["lhs"] == 0 and out["ratio"] == 0


def test_moment_2r_matches_petersson():
    # one prime, a_2 = sqrt 2: the weighted sum is sum_h lam_h(2)^2 / L(1, sym^2 h)
    k = 100
    basis = hecke_basis(k, 2000)
    out = moment_2r_check(1, k, 2.5, {2: math.sqrt(2)}, basis=basis, enforce=False, P=2000)
    oracle = petersson_delta_check(k, 2, 2, basis=basis, P=2000, strict=False)
    assert out["lhs_weighted"] * 2 * math.pi ** 2 / (k - 1) == pytest.approx(oracle, rel=1e-9)


def test_moment_2r_preconditions():
    with pytest.raises(ValueError, match="exceeds k"):
        moment_2r_check(1, 200, 50, lambda p: 1.0)
    with pytest.raises(ValueError, match="cap"):
        moment_2r_check(1, 200, 10, {2: 100.0}, enforce=False, P=500)
    assert moment_2r_check(1, 200, 200 ** 0.1, lambda p: 1.0, P=500)["vacuous"]
