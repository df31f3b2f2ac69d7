import random
from itertools import combinations
from math import comb

import pytest

import dimredcech.dimred as dimred
from dimredcech.abelian import PreconditionError
from dimredcech.dimred import (
    DimRedCochain, DimRedComplex, TruncatedCochain, TwistData, c_of_f, cup1_mat, cup1_vec, cup2, d_bar_F, d_F,
    dimred_cohomology,
)
from dimredcech.nerve import Cochain, CoefficientSystem, fixture, fixture_with_cocycle
from dimredcech.sampling import random_cochain, random_cocycle_F, random_nerve, random_pair, random_triple


def _vec(n):
    return CoefficientSystem("Z", "vector", n)


def _upper(n):
    return CoefficientSystem("Z", "upper", n)


def test_cup1_vec_example():
    N = fixture("simplex3")
    phi = Cochain(N, 1, _vec(2), {(0, 1): (2, -1)})
    F = Cochain(N, 2, _vec(2), {(1, 2, 3): (5, 7)})
    assert cup1_vec(phi, F).value((0, 1, 2, 3)) == (2 * 5 - 7,)


def test_cup1_mat_example():
    N = fixture("simplex2")
    phi = Cochain(N, 0, _upper(2), {(0,): (1,)})
    a, b = 4, -3
    F = Cochain(N, 2, _vec(2), {(0, 1, 2): (a, b)})
    assert cup1_mat(phi, F).value((0, 1, 2)) == (-b, a)


def test_cup2_against_brute_force(rng):
    N = fixture("simplex5")
    n = 3
    for _ in range(5):
        phi = random_cochain(N, 1, _upper(n), rng)
        CF = random_cochain(N, 3, _upper(n), rng)
        got = cup2(phi, CF)
        for s in combinations(range(6), 5):
            x, c = phi.value(s[:2]), CF.value(s[1:])
            assert got.value(s) == (sum(u * v for u, v in zip(x, c)),)


def test_c_of_f_requires_cocycle():
    N = fixture("simplex3")
    with pytest.raises(PreconditionError):
        c_of_f(Cochain(N, 2, _vec(2), {(0, 1, 2): (1, 0)}))
    with pytest.raises(PreconditionError):
        TwistData.from_s(Cochain(N, 1, CoefficientSystem("Q", "vector", 1), {(0, 1): (0.5,)}))


def test_d_squared_zero_sweep():
    r = random.Random(7)
    for _ in range(40):
        N = random_nerve(r, 14, 5)
        n = r.randint(1, 3)
        tw = TwistData.from_cocycle(random_cocycle_F(N, n, r))
        for k in range(5):
            assert d_F(d_F(random_triple(N, k, n, r), tw), tw).is_zero()
            assert d_bar_F(d_bar_F(random_pair(N, k, n, r), tw), tw).is_zero()


def test_d_squared_detects_flipped_cup2(monkeypatch):
    """Negative control: with the cup-2 term negated, D_F² = 0 must fail somewhere."""
    orig = dimred.cup2
    monkeypatch.setattr(dimred, "cup2", lambda phi, CF: -orig(phi, CF))
    r = random.Random(7)
    failures = 0
    for _ in range(40):
        N = random_nerve(r, 14, 5)
        n = r.randint(1, 3)
        tw = TwistData.from_cocycle(random_cocycle_F(N, n, r))
        for k in range(5):
            if not d_F(d_F(random_triple(N, k, n, r), tw), tw).is_zero():
                failures += 1
    assert failures > 0


def test_matrix_matches_cochain_differential(rng):
    N = random_nerve(rng, 8, 4)
    tw = TwistData.from_cocycle(random_cocycle_F(N, 2, rng))
    cx = DimRedComplex(tw)
    for k in range(4):
        c = random_triple(N, k, 2, rng)
        assert cx.matrix(k).apply(c.to_vector()) == d_F(c, tw).to_vector()
        p = random_pair(N, k, 2, rng)
        assert cx.bar_matrix(k).apply(p.to_vector()) == d_bar_F(p, tw).to_vector()


def test_vector_round_trip(rng):
    N = fixture("torus7")
    c = random_triple(N, 2, 3, rng)
    assert DimRedCochain.from_vector(N, 2, 3, c.to_vector()) == c
    p = random_pair(N, 1, 3, rng)
    assert TruncatedCochain.from_vector(N, 1, 3, p.to_vector()) == p


@pytest.mark.parametrize("n", [1, 2, 3])
def test_point_nerve(n):
    N = fixture("point")
    tw = TwistData.zero(N, n)
    got = [dimred_cohomology(N, tw, "Z", k) for k in range(4)]
    assert [g.free_rank for g in got] == [1, n, comb(n, 2), 0]
    assert all(not g.torsion for g in got)


# Total spaces of circle bundles: Heisenberg nilmanifolds over T² and
# S³ / lens spaces over S², Euler class m times the generator.
CIRCLE_BUNDLES = [
    ("torus7", 1, [(1, ()), (2, ()), (2, ()), (1, ())]),
    ("torus7", 3, [(1, ()), (2, ()), (2, (3,)), (1, ())]),
    ("torus7", 0, [(1, ()), (3, ()), (3, ()), (1, ())]),
    ("sphere_tetra", 1, [(1, ()), (0, ()), (0, ()), (1, ())]),
    ("sphere_tetra", 3, [(1, ()), (0, ()), (0, (3,)), (1, ())]),
    ("sphere_tetra", 0, [(1, ()), (1, ()), (1, ()), (1, ())]),
]


@pytest.mark.parametrize("name,m,expected", CIRCLE_BUNDLES)
def test_circle_bundle_total_spaces(name, m, expected):
    N, g = fixture_with_cocycle(name)
    cx = DimRedComplex(TwistData.from_scalar_cocycles([m * g]))
    got = [(cx.cohomology(k).free_rank, cx.cohomology(k).torsion) for k in range(4)]
    assert got == expected
    assert cx.cohomology(4).is_trivial()


def test_rational_cohomology_is_free_part():
    N, g = fixture_with_cocycle("sphere_tetra")
    cx = DimRedComplex(TwistData.from_scalar_cocycles([3 * g]))
    assert cx.cohomology(2, "Q").is_trivial()
    assert cx.cohomology(3, "Q").free_rank == 1


def test_generator_triples_are_closed():
    N, g = fixture_with_cocycle("torus7")
    tw = TwistData.from_scalar_cocycles([g])
    cx = DimRedComplex(tw)
    for k in range(4):
        for t in cx.generator_triples(k):
            assert d_F(t, tw).is_zero()


def test_twist_mismatch_rejected():
    N = fixture("simplex2")
    tw = TwistData.zero(N, 2)
    with pytest.raises(ValueError):
        d_F(DimRedCochain.zero(N, 1, 3), tw)


def test_qmodz_triples_reduce():
    N = fixture("simplex2")
    c = DimRedCochain.zero(N, 1, 1)
    c2 = c.with_ring("Q") + DimRedCochain.build(N, 1, 1, top=Cochain(N, 1, "Q", {(0, 1): 3}), ring="Q")
    assert c2.with_ring("QmodZ", 2).is_zero()
