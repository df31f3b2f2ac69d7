import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimredcech.abelian import PreconditionError
from dimredcech.dimred import TwistData, d_F
from dimredcech.gysin import bockstein_zigzag
from dimredcech.nerve import Cochain, CoefficientSystem, cech_differential, fixture, mod1
from dimredcech.obstruction import (
    GMatrix, ModelViolation, MonomialMatrix, extract_xi_triple, lemma4_triple, mackey_phi, phillips_raeburn_eta,
    random_gmatrix, random_rational_s, verify_gluing, weyl, weyl_fixtures, weyl_pair, weyl_single_patch,
)


@st.composite
def monomials_of(draw, size):
    perm = draw(st.permutations(range(size)))
    phases = draw(st.lists(st.fractions(min_value=0, max_value=1, max_denominator=12), min_size=size, max_size=size))
    return MonomialMatrix(tuple(perm), tuple(phases))


def _dense_mul(A, B):
    """Product of phase-valued dense matrices; None is the zero entry."""
    n = len(A)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for k in range(n):
            terms = [A[i][j] + B[j][k] for j in range(n) if A[i][j] is not None and B[j][k] is not None]
            assert len(terms) <= 1
            if terms:
                out[i][k] = mod1(terms[0])
    return out


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(monomials_of(n), monomials_of(n))))
def test_monomial_product_matches_dense(pair):
    A, B = pair
    assert (A @ B).to_dense() == _dense_mul(A.to_dense(), B.to_dense())
    assert (A @ A.inverse()) == MonomialMatrix.identity(A.size)
    assert A ** 3 == A @ A @ A
    assert A ** -2 == A.inverse() @ A.inverse()


def test_monomial_validation_and_json():
    with pytest.raises(ValueError):
        MonomialMatrix((0, 0), (0, 0))
    M = weyl(4, 1, 3)
    assert MonomialMatrix.from_json(M.to_json()) == M
    assert MonomialMatrix.scalar(3, Fraction(4, 3)).scalar_phase() == Fraction(1, 3)
    assert M.scalar_phase() is None


def test_weyl_commutator_small_cases():
    # N = 2 by hand: clock = diag(1, -1), shift swaps; clock·shift = -shift·clock
    clock, shift = weyl_pair(2)
    assert clock.to_dense() == [[0, None], [None, Fraction(1, 2)]]
    assert shift.to_dense() == [[None, 0], [0, None]]
    assert mackey_phi([clock, shift]) == [Fraction(1, 2)]
    assert mackey_phi([clock, clock ** 2]) == [0]


def test_weyl_commutator_is_symplectic_form():
    # clock^a shift^b against clock^c shift^d: phase (ad - bc)/N from the Weyl relation
    N = 5
    ex = [(1, 0), (0, 2), (3, 1), (4, 4)]
    u = [weyl(N, a, b) for a, b in ex]
    expect = [mod1(Fraction(ex[i][0] * ex[j][1] - ex[i][1] * ex[j][0], N)) for i in range(4) for j in range(i + 1, 4)]
    assert mackey_phi(u) == expect


def test_mackey_rejects_nonscalar_commutator():
    a = MonomialMatrix.diagonal([0, Fraction(1, 3), Fraction(1, 2)])
    b = MonomialMatrix((1, 0, 2), (0, 0, 0))
    with pytest.raises(ModelViolation):
        mackey_phi([a, b])
    with pytest.raises(ValueError):
        weyl_pair(1)


def test_phillips_raeburn_eta():
    N = fixture("circle3")
    c, _ = weyl_pair(3)
    u = {v: [c, c ** 2] for v in range(3)}
    scal = lambda p: MonomialMatrix.scalar(3, p)
    u2 = {v: [scal(Fraction(v, 6)) @ c, scal(Fraction(1, 4)) @ (c ** 2)] for v in range(3)}
    eta = phillips_raeburn_eta(N, u, u2)
    assert eta.value((0, 1)) == (Fraction(1, 6), Fraction(1, 4))
    assert eta.value((1, 2)) == (Fraction(1, 3), Fraction(1, 4))
    _, sh = weyl_pair(3)
    with pytest.raises(ModelViolation):
        phillips_raeburn_eta(N, {v: [c, sh] for v in range(3)}, u2)


def test_gmatrix():
    g = GMatrix.from_dense([[0, Fraction(1, 2), 3], [0, 0, -1], [0, 0, 0]])
    assert g[(0, 2)] == 3 and g[(1, 2)] == -1
    with pytest.raises(ValueError):
        GMatrix.from_dense([[1, 0], [0, 0]])


@pytest.mark.parametrize("N", [2, 3, 5])
def test_single_patch_triple(N):
    t = extract_xi_triple(weyl_single_patch(N))
    assert t.bot.value((0,)) == (Fraction(1, N),)
    assert t.mid.is_zero() and t.top.is_zero()


def test_shipped_fixtures_are_consistent():
    fx = weyl_fixtures()
    assert sorted(fx) == ["circle3_N3", "single_patch_N2", "single_patch_N3", "single_patch_N5",
                          "sphere_tetra_N4", "torus7_N5"]
    for name, data in fx.items():
        t = extract_xi_triple(data)
        assert d_F(t, data.twist).is_zero()
        assert verify_gluing(data, t).consistent


def test_corruption_names_offending_simplices():
    data = weyl_fixtures()["torus7_N5"]
    edge = (0, 1)
    bad = data.with_connector(edge, data.connectors[edge] @ weyl(5, 1, 0))
    rep = verify_gluing(bad)
    assert not rep.consistent
    assert rep.offending and all(set(edge) <= set(s) and len(s) == 3 for s in rep.offending)
    with pytest.raises(ModelViolation):
        extract_xi_triple(bad)


def test_random_rational_s_has_integral_coboundary():
    r = random.Random(9)
    for name in ("projective6", "torus7", "sphere_tetra"):
        nerve = fixture(name)
        for _ in range(5):
            s = random_rational_s(nerve, 2, r)
            ds = cech_differential(s)
            assert all(x.denominator == 1 for v in ds.values.values() for x in v)


def test_random_rational_s_reaches_torsion_classes():
    from dimredcech.nerve import cech_cohomology

    r = random.Random(10)
    nerve = fixture("projective6")
    h2 = cech_cohomology(nerve, "Z", 2)
    seen = set()
    for _ in range(20):
        F = TwistData.from_s(random_rational_s(nerve, 1, r)).F
        seen.add(h2.coordinates(F.component(0).to_vector()))
    assert seen == {(0,), (1,)}


def test_lemma4_triples_vanish_under_bockstein():
    r = random.Random(11)
    nerve = fixture("projective6")
    for _ in range(10):
        tw = TwistData.from_s(random_rational_s(nerve, 2, r))
        t = lemma4_triple(random_gmatrix(2, r), tw)
        assert bockstein_zigzag(t, tw).is_zero


def test_lemma4_on_three_dimensional_nerve():
    # 3-simplices make the cup-2 and top-slot terms of D_F matter
    r = random.Random(12)
    nerve = fixture("simplex4")
    for _ in range(5):
        tw = TwistData.from_s(random_rational_s(nerve, 3, r))
        g = GMatrix(3, (Fraction(1, 3), Fraction(-2, 5), Fraction(5, 7)))
        t = lemma4_triple(g, tw)
        assert d_F(t, tw).is_zero()


def test_lemma4_preconditions():
    nerve = fixture("simplex2")
    with pytest.raises(PreconditionError):
        lemma4_triple(GMatrix(2, (1,)), TwistData.zero(nerve, 2))
    s = Cochain(nerve, 1, CoefficientSystem("Q", "vector", 3))
    with pytest.raises(ValueError):
        lemma4_triple(GMatrix(2, (1,)), TwistData.from_s(s))
