import random
from fractions import Fraction
from math import comb

import pytest

import dimredcech.derham as derham
from dimredcech.abelian import rational_rank
from dimredcech.derham import (
    BhmComplex, BhmElement, CurvatureMatrix, InvariantModel, ModelError, bhm_cohomology, bhm_gysin_check,
    ce_total_space, d_F2, monomials, tdual_pushforward, wedge_f2,
)

HEIS = [1, 2, 2, 1]
HEIS_X_R = [1, 3, 4, 3, 1]  # Künneth with a circle


def _torus(m, n, entries):
    return InvariantModel.torus(CurvatureMatrix(m, n, entries))


# Lie algebra cohomology from standard facts: abelian algebras give
# binomials, a nonzero F₂ on a 2-torus gives the Heisenberg algebra, and a
# nonzero decomposable form plus a spectator direction gives Heisenberg × ℝ.
LIE = [
    (2, 1, ((0,),), [comb(3, k) for k in range(4)]),
    (2, 1, ((1,),), HEIS),
    (2, 1, ((-4,),), HEIS),
    (3, 1, ((1, 0, 0),), HEIS_X_R),
    (3, 1, ((1, 0, 2),), HEIS_X_R),
    (2, 2, ((1,), (0,)), HEIS_X_R),
    (2, 2, ((1,), (2,)), HEIS_X_R),
    (2, 2, ((0,), (0,)), [comb(4, k) for k in range(5)]),
]


@pytest.mark.parametrize("m,n,entries,betti", LIE)
def test_ce_oracle_matches_known_lie_algebras(m, n, entries, betti):
    model = _torus(m, n, entries)
    assert [ce_total_space(model, k) for k in range(m + n + 1)] == betti


@pytest.mark.parametrize("m,n,entries,betti", LIE)
def test_bhm_full_window_matches(m, n, entries, betti):
    model = _torus(m, n, entries)
    assert [bhm_cohomology(model, k, 0, k).dimension for k in range(m + n + 1)] == betti
    assert [bhm_cohomology(model, k).dimension for k in range(m + n + 1)] == betti


def test_d_squared_zero_random_models():
    r = random.Random(3)
    for _ in range(12):
        m, n = r.randint(2, 4), r.randint(1, 3)
        entries = tuple(tuple(Fraction(r.randint(-3, 3), r.randint(1, 2)) for _ in range(comb(m, 2))) for _ in range(n))
        model = _torus(m, n, entries)
        for lo in range(n + 1):
            for hi in range(lo, n + 1):
                cx = BhmComplex(model, lo, hi)
                for k in range(m + n):
                    A, B = cx.matrix(k), cx.matrix(k + 1)
                    if cx.dim(k) and cx.dim(k + 2):
                        prod = [[sum(B[i][t] * A[t][j] for t in range(cx.dim(k + 1))) for j in range(cx.dim(k))]
                                for i in range(cx.dim(k + 2))]
                        assert not any(any(row) for row in prod)


def test_random_models_match_ce():
    r = random.Random(4)
    for _ in range(8):
        m, n = r.randint(2, 4), r.randint(1, 3)
        entries = tuple(tuple(r.randint(-2, 2) for _ in range(comb(m, 2))) for _ in range(n))
        model = _torus(m, n, entries)
        top = m + n
        assert [bhm_cohomology(model, k, 0, k).dimension for k in range(top + 1)] == \
            [ce_total_space(model, k) for k in range(top + 1)]


def test_wedge_omission_sign():
    """(ξ₀ξ₁) ∧ F₂ contracts with signs +F₂^{(0)} on ξ₁ and -F₂^{(1)} on ξ₀."""
    model = _torus(2, 2, ((1,), (5,)))
    H = BhmElement(2, {(0, 1): [Fraction(1)]})
    W = wedge_f2(H, model, 2)
    assert W.k == 3
    assert W.components == {(1,): [Fraction(1)], (0,): [Fraction(-5)]}


def test_d_f2_matches_matrix():
    model = _torus(2, 1, ((1,),))
    H = BhmElement(1, {(0,): [Fraction(1)]})
    # d(1 ⊗ ξ) = (-1)^{k-i-1} F₂ with k = 1, i = 1
    assert d_F2(H, model).components == {(): [Fraction(-1)]}


def test_tdual_pushforward():
    model = _torus(2, 1, ((0,),))
    H = BhmElement(1, {(): [Fraction(1), Fraction(0)], (0,): [Fraction(2)]})
    out = tdual_pushforward(H, model)
    assert out.components == {(0,): [Fraction(2)]}
    bad = _torus(2, 1, ((1,),))
    with pytest.raises(ValueError):
        tdual_pushforward(BhmElement(1, {(0,): [Fraction(1)]}), bad)


@pytest.mark.parametrize("m,n,entries,betti", LIE)
def test_gysin_exact_every_window(m, n, entries, betti):
    model = _torus(m, n, entries)
    for lo in range(n):
        for hi in range(lo + 1, n + 1):
            reps = bhm_gysin_check(model, range(0, m + n + 2), lo, hi)
            assert all(r.exact for r in reps)


def test_gysin_detects_missing_connecting_map(monkeypatch):
    """Negative control: a zero ∧F₂ breaks exactness on the Heisenberg model."""
    model = _torus(2, 1, ((1,),))
    monkeypatch.setattr(derham, "wedge_f2", lambda H, model, i: BhmElement(H.k + 1, {}))
    reps = bhm_gysin_check(model, range(0, 4))
    assert not all(r.exact for r in reps)


def test_gysin_rank_identity_for_heisenberg():
    # H^{k,(0,0)} = Λ^k(T²): dims 1, 2, 1; the low column carries the whole base
    model = _torus(2, 1, ((1,),))
    assert [bhm_cohomology(model, k, 0, 0).dimension for k in range(3)] == [1, 2, 1]
    assert [bhm_cohomology(model, k, 1, 1).dimension for k in range(1, 4)] == [1, 2, 1]


def test_model_validation():
    with pytest.raises(ModelError):
        # d(1) = dz₁ does not commute with wedging by dz₂∧dz₃
        InvariantModel(3, 1, {0: [[1], [0], [0]]}, ({0: [[0], [0], [1]], 1: [[1, 0, 0]]},))
    with pytest.raises(ValueError):
        CurvatureMatrix(2, 1, ((1, 2),))
    with pytest.raises(ModelError):
        ce_total_space(InvariantModel(2, 1, {}, ({},)), 1)


def test_monomials_and_rank_helper():
    assert monomials(3, 2) == [(0, 1), (0, 2), (1, 2)]
    assert rational_rank([[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]]) == 1


def test_bad_window():
    with pytest.raises(ValueError):
        BhmComplex(_torus(2, 1, ((1,),)), 1, 0)
    with pytest.raises(ValueError):
        bhm_gysin_check(_torus(2, 1, ((1,),)), range(2), 1, 1)
