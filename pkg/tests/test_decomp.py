import json
import random
from fractions import Fraction

import mpmath
import pytest

from cuspdecay.analytic import petersson_norm_quadrature
from cuspdecay.decomp import (
    QuadraticFormSpec,
    SpecError,
    build_quadratic,
    decompose_spec,
    hecke_decompose,
    lp_norm,
    lp_scan,
    second_coeff_and_bounds,
    sparsity_certificate,
)
from cuspdecay.exactq import series_linear
from cuspdecay.hecke import hecke_basis

DELTA_SQ = {"a": [[1]], "weights": [12], "combos": [[[0, 1]]], "target_weight": 24}
CANCEL = {"a": [[1, 0], [0, -1]], "weights": [12, 12], "combos": [[[0, 1]], [[0, 1]]], "target_weight": 24}


def spec(d):
    return QuadraticFormSpec.from_dict(json.loads(json.dumps(d)))


def test_delta_squared():
    Q = build_quadratic(spec(DELTA_SQ))
    assert Q.weight == 24 and Q.coeffs[0] == 0
    assert Q.coeffs[2] == 1 and Q.coeffs[3] == -48


def test_cancellation_gives_zero():
    s = spec(CANCEL)
    assert build_quadratic(s).is_zero()
    a, _ = second_coeff_and_bounds(s)
    assert a == 0


def test_second_coefficient_matches_series():
    H12, H24 = hecke_basis(12, 40), hecke_basis(24, 40)
    s = spec({"a": [[2, "1/3", 0], ["1/3", 0, 0], [0, 0, 0]], "weights": [12, 12, 24],
              "combos": [[[0, 1]], [[0, "5/2"]], [[0, 1], [1, -1]]], "target_weight": 24})
    a, B = second_coeff_and_bounds(s)
    Q = build_quadratic(s)
    assert abs(Q.coeffs[2] - mpmath.mpf(a.numerator) / a.denominator) < 1e-20
    assert B >= 0


def test_bound_for_mixed_products():
    s = spec({"a": [[0, 1], [1, 0]], "weights": [12, 24], "combos": [[[0, 1]], [[0, 1], [1, 2]]],
              "target_weight": 36})
    a, B = second_coeff_and_bounds(s)
    assert a == 2 * 3
    # two cross terms (r2 = 0, 1), each appearing in both orders
    assert B == pytest.approx(2 * (1 + 2))


def test_spec_validation():
    bad = dict(DELTA_SQ, a=[[1, 2], [3, 1]], weights=[12, 12], combos=[[[0, 1]], [[0, 1]]])
    with pytest.raises(SpecError, match="symmetric"):
        spec(bad)
    with pytest.raises(SpecError, match="k_0 \\+ k_0"):
        spec(dict(DELTA_SQ, target_weight=26))
    with pytest.raises(SpecError, match="out of range"):
        spec(dict(DELTA_SQ, combos=[[[1, 1]]]))
    with pytest.raises(SpecError, match="more than M"):
        spec(dict(DELTA_SQ, weights=[24], target_weight=48, combos=[[[0, 1], [1, 1]]], M=1))
    with pytest.raises(SpecError, match="line 3, column 1"):
        QuadraticFormSpec.from_json('{"a": [[1]],\n "weights": [12,\n]}')


def test_spec_json_round_trip():
    s = spec(DELTA_SQ)
    assert QuadraticFormSpec.from_dict(s.to_dict()).to_dict() == s.to_dict()


def test_decompose_eigenform_itself():
    H = hecke_basis(36, 40)
    d = hecke_decompose(H[1].series(), H)
    assert [round(float(abs(c)), 12) for c in d.c] == [0.0, 1.0, 0.0]


def test_delta_squared_decomposition():
    H = hecke_basis(24, 40)
    d = hecke_decompose(build_quadratic(spec(DELTA_SQ)), H)
    assert len(d.c) == 2
    total = sum(abs(c) for c in d.c)
    assert abs(sum(d.c)) <= 1e-10 * total
    assert d.residual <= 1e-10


def test_decomposition_rejects_bad_input():
    H = hecke_basis(24, 40)
    with pytest.raises(ValueError, match="needs q\\^"):
        hecke_decompose(build_quadratic(spec(DELTA_SQ), N=10), H)


def test_uniqueness_round_trip():
    H = hecke_basis(48, 40)
    d = hecke_decompose(build_quadratic(spec({"a": [[1]], "weights": [24], "combos": [[[0, 1], [1, "-3/7"]]],
                                              "target_weight": 48})), H)
    F = series_linear([(c, h.series()) for c, h in zip(d.c, H)])
    d2 = hecke_decompose(F, H)
    tol = mpmath.mpf(10) ** (-H[0].precision / 4)
    for a, b in zip(d.c, d2.c):
        assert abs(a - b) <= tol * max(abs(x) for x in d.c)


def test_lp_norm_properties():
    dec = decompose_spec(spec(DELTA_SQ), [0.5, 1, 2])
    assert dec.lp[0.5] >= dec.lp[1] >= dec.lp[2]
    with pytest.raises(ValueError):
        lp_norm(dec, 0)
    H = hecke_basis(24, 40)
    single = hecke_decompose(H[0].series(), H)
    assert lp_norm(single, 1) == pytest.approx(abs(complex(single.inner[0])))


def test_parseval_delta_squared():
    s = spec(DELTA_SQ)
    dec = decompose_spec(s)
    Qhat = build_quadratic(s, bases={12: hecke_basis(12, 60)}, N=60, normalize=True)
    l2sq = float(petersson_norm_quadrature(Qhat).value)
    assert sum(abs(complex(x)) ** 2 for x in dec.inner) == pytest.approx(l2sq, rel=0.02)


def test_sparsity_certificate_examples():
    dec = decompose_spec(spec(DELTA_SQ))
    one = sparsity_certificate(dec, 1, 0.0)
    assert one["nnz"] == 2 and not one["sparse_representation_exists"]
    assert sparsity_certificate(dec, 2, 0.0)["sparse_representation_exists"]
    zero = decompose_spec(spec(CANCEL))
    assert sparsity_certificate(zero, 1, 0.0)["nnz"] == 0


def test_sparsity_round_trip_random():
    rng = random.Random(5)
    H = hecke_basis(72, 40)
    for L in (1, 2, 4):
        idx = rng.sample(range(len(H)), L)
        F = series_linear([(Fraction(rng.randint(1, 9), rng.randint(1, 9)), H[r].series()) for r in idx])
        assert sparsity_certificate(hecke_decompose(F, H), L, 0.0)["nnz"] == L


def test_witness_holds_for_exact_support():
    dec = decompose_spec(spec(DELTA_SQ))
    rep = sparsity_certificate(dec, 2, 0.0)
    assert rep["witness_holds"]


def test_scan_shape():
    rows = lp_scan([24, 26, 36], [1.0, 2.0], "squares")
    assert {(r["k"], r["p"]) for r in rows} == {(24, 1.0), (24, 2.0), (36, 1.0), (36, 2.0)}
    first = [r for r in rows if r["k"] == 24 and r["p"] == 1.0][0]
    assert first["value"] == pytest.approx(decompose_spec(spec(DELTA_SQ), [1.0]).lp[1.0])
    prods = lp_scan([36], [1.0], "products")
    assert len(prods) == 1 and prods[0]["mode"] == "products"
    with pytest.raises(ValueError):
        lp_scan([22], [1.0])
