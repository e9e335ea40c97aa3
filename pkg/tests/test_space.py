import pytest

from cuspdecay.space import cusp_space, dim_cusp, miller_basis, monomial_exponents, monomial_rank


@pytest.mark.parametrize("k,d", [(0, 0), (10, 0), (12, 1), (14, 0), (24, 2), (26, 1), (36, 3), (38, 2), (600, 50)])
def test_dimension_formula(k, d):
    assert dim_cusp(k) == d


def test_odd_weight_rejected():
    with pytest.raises(ValueError, match="odd"):
        dim_cusp(13)


def test_weight_12_basis_is_delta():
    s = miller_basis(12, 6)
    assert s.rows[0] == [0, 1, -24, 252, -1472, 4830, -6048]


def test_weight_24_echelon():
    s = miller_basis(24, 8)
    assert [r[1:3] for r in s.rows] == [[1, 0], [0, 1]]
    # second row is Delta^2
    assert s.rows[1][:5] == [0, 0, 1, -48, 1080]


@pytest.mark.parametrize("k", [12, 24, 36, 60, 96])
def test_rank_matches_dimension(k):
    d = dim_cusp(k)
    assert monomial_rank(k, d + 5) == d


def test_truncation_too_small():
    with pytest.raises(ValueError, match="too small"):
        miller_basis(36, 3)


def test_registry_reuses_longer_truncation():
    big = cusp_space(48, 40)
    small = cusp_space(48, 20)
    assert small.trunc == 20
    assert [r[:21] for r in big.rows] == [list(r) for r in small.rows]


def test_monomials_have_right_weight():
    for a, b, c in monomial_exponents(60):
        assert 12 * a + 4 * b + 6 * c == 60 and a >= 1


def test_coordinates():
    s = miller_basis(36, 10)
    f = s.miller[1]
    assert s.coordinates(f) == [0, 1, 0]
