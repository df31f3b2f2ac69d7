"""Acceptance gate: twelve exact criteria, each timed against a 60 s budget.

Run under pytest (a PASS/FAIL line per criterion appears in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import random
import subprocess
import sys
import time
from fractions import Fraction
from math import comb
from pathlib import Path

from dimredcech.abelian import FpAbelianGroup
from dimredcech.derham import CurvatureMatrix, InvariantModel, bhm_cohomology, bhm_gysin_check, ce_total_space
from dimredcech.dimred import DimRedComplex, TwistData, c_of_f, d_F
from dimredcech.gysin import bockstein_zigzag, cech_bockstein, exactness_report, mod_n_cocycles, theorem4_rows_check
from dimredcech.nerve import (
    CUP1_SIGN, Cochain, CoefficientSystem, cech_cohomology, cech_differential, coboundary_matrix, cup, cup1,
    fixture, fixture_with_cocycle, pairs,
)
from dimredcech.obstruction import (
    ModelViolation, extract_xi_triple, lemma4_triple, mackey_phi, random_gmatrix, random_rational_s,
    verify_gluing, weyl, weyl_fixtures, weyl_pair,
)
from dimredcech.sampling import random_cocycle_F, random_nerve, random_triple

BUDGET = 60.0
ROOT = Path(__file__).resolve().parents[1]
FIVE = ("point", "circle3", "torus7", "sphere_tetra", "projective6")


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    dt = time.perf_counter() - t0
    assert dt < BUDGET, f"took {dt:.1f}s"
    return dt


def _torsion_twists():
    """projective6 with n = 2: F = 0, (t, 0) and (t, t), t the order-2 generator of Ȟ²."""
    nerve = fixture("projective6")
    h2 = cech_cohomology(nerve, "Z", 2)
    assert h2.torsion == (2,) and h2.free_rank == 0
    t = Cochain.from_vector(nerve, 2, "Z", list(h2.generators[0]))
    zero = Cochain(nerve, 2, "Z")
    return nerve, [TwistData.from_scalar_cocycles(p) for p in ((zero, zero), (t, zero), (t, t))]


def _heisenberg_twist():
    nerve, gen = fixture_with_cocycle("torus7")
    assert gen is not None
    return nerve, TwistData.from_scalar_cocycles([gen])


# 1 ------------------------------------------------------------------------

def check_d_squared():
    rng = random.Random(101)
    failures = 0
    for _ in range(200):
        nerve = random_nerve(rng, 20, 5)
        n = rng.randint(1, 3)
        twist = TwistData.from_cocycle(random_cocycle_F(nerve, n, rng))
        for k in range(0, 5):
            c = random_triple(nerve, k, n, rng)
            if not d_F(d_F(c, twist), twist).is_zero():
                failures += 1
    assert failures == 0, f"{failures} instances with D_F² != 0"


# 2 ------------------------------------------------------------------------

def check_cf_identity():
    assert CUP1_SIGN == 1
    # frozen sign table: the two terms of a ∪₁ b on the 3-simplex (0123)
    s3 = fixture("simplex3")
    ind = lambda s: Cochain(s3, 2, "Z", {s: 1})
    assert cup1(ind((0, 1, 2)), ind((0, 2, 3))).value((0, 1, 2, 3)) == (1,)
    assert cup1(ind((1, 2, 3)), ind((0, 1, 3))).value((0, 1, 2, 3)) == (-1,)
    assert cup1(ind((0, 1, 2)), ind((0, 1, 3))).value((0, 1, 2, 3)) == (0,)
    rng = random.Random(202)
    checked = 0
    for _ in range(60):
        nerve = random_nerve(rng, 12, 5)
        n = rng.randint(2, 3)
        F = random_cocycle_F(nerve, n, rng)
        CF = c_of_f(F)
        dC = cech_differential(CF)
        for idx, (i, j) in enumerate(pairs(n)):
            Fi, Fj = F.component(i), F.component(j)
            assert dC.component(idx) == cup(Fi, Fj) - cup(Fj, Fi)
            assert CF.component(idx) == cup1(Fi, Fj)
            checked += 1
    assert checked > 100


# 3 ------------------------------------------------------------------------

def check_f0_decomposition():
    for name in FIVE:
        nerve = fixture(name)
        H = [cech_cohomology(nerve, "Z", k) for k in range(5)]
        trivial = FpAbelianGroup(0)
        for n in (1, 2, 3):
            cx = DimRedComplex(TwistData.zero(nerve, n))
            for k in range(5):
                parts = [H[k]] + [H[k - 1] if k >= 1 else trivial] * n + [H[k - 2] if k >= 2 else trivial] * comb(n, 2)
                expect = parts[0].direct_sum(*parts[1:])
                got = cx.cohomology(k)
                assert got.same_invariants(expect), (name, n, k, got.invariants(), expect.invariants())


# 4 ------------------------------------------------------------------------

def _verify_witnesses(rep, f, g, dB_in, dC_in):
    for a, x in zip(rep.source_cocycles, rep.composite_witnesses):
        ga = g.apply(f.apply(a)) if f.cols and g.cols else [0] * g.rows
        dx = dC_in.apply(x) if dC_in.cols else [0] * dC_in.rows
        assert ga == dx
    for z, x in zip(rep.kernel_elements, rep.kernel_witnesses):
        na = len(rep.source_cocycles)
        image = [0] * len(z)
        for coeff, a in zip(x[:na], rep.source_cocycles):
            fa = f.apply(a)
            image = [u + coeff * w for u, w in zip(image, fa)]
        if dB_in.cols:
            image = [u + w for u, w in zip(image, dB_in.apply(x[na:]))]
        assert image == list(z)


def _exact_with_witnesses(nerve, twist):
    from dimredcech.gysin import GysinMaps

    reps = exactness_report(nerve, twist, "Z", range(0, 5))
    G = GysinMaps(twist)
    cx = G.cx
    wiring = {
        "cech": lambda k: (G.cup_matrix(k - 2), G.pi_star_matrix(k), G.cech_d(k - 1), cx.matrix(k - 1)),
        "dimred": lambda k: (G.pi_star_matrix(k), G.pi_lower_matrix(k), cx.matrix(k - 1), cx.bar_matrix(k - 2)),
        "truncated": lambda k: (G.pi_lower_matrix(k), G.cup_matrix(k - 1), cx.bar_matrix(k - 2), G.cech_d(k)),
    }
    assert len(reps) == 15
    for r in reps:
        assert r.exact, (r.name, r.degree, r.failure)
        k = r.degree + 1 if r.name == "truncated" else r.degree
        _verify_witnesses(r, *wiring[r.name](k))
        assert len(r.kernel_witnesses) == r.kernel_generators
        assert len(r.composite_witnesses) == len(r.source_cocycles)


def check_integer_exactness():
    nerve, tw = _heisenberg_twist()
    _exact_with_witnesses(nerve, tw)
    nerve, tws = _torsion_twists()
    for tw in tws:
        _exact_with_witnesses(nerve, tw)


# 5 ------------------------------------------------------------------------

def check_squares():
    configs = [_heisenberg_twist()]
    nerve, tws = _torsion_twists()
    configs += [(nerve, tw) for tw in tws]
    for N in (2, 6, 12):
        for nerve, tw in configs:
            reps = theorem4_rows_check(nerve, tw, N, 3)
            assert reps and all(r.ok for r in reps), [r.summary() for r in reps if not r.ok]
            # degree-3 Čech squares are empty on 2-dimensional nerves
            assert sum(r.samples for r in reps) > 0


# 6 ------------------------------------------------------------------------

def check_lemma4():
    rng = random.Random(606)
    pool = [fixture("projective6"), fixture("torus7")]
    pool += [random_nerve(rng, 10, 3) for _ in range(3)]
    for i in range(50):
        nerve = pool[i % len(pool)]
        n = rng.randint(2, 3)
        s = random_rational_s(nerve, n, rng)
        tw = TwistData.from_s(s)
        assert cech_differential(s) == tw.F.with_ring("Q")
        g = random_gmatrix(n, rng)
        t = lemma4_triple(g, tw)
        assert d_F(t, tw).is_zero()
        assert bockstein_zigzag(t, tw).is_zero


# 7, 8 ---------------------------------------------------------------------

def de_rham_models():
    e = lambda *rows: rows
    return {
        (2, 1): [e((1,)), e((0,)), e((3,))],
        (2, 2): [e((1,), (0,)), e((1,), (2,)), e((0,), (0,))],
        (3, 1): [e((1, 0, 0)), e((0, 2, 1)), e((0, 0, 0))],
    }


def check_bhm_ce():
    heis = None
    for (m, n), curvs in de_rham_models().items():
        for entries in curvs:
            model = InvariantModel.torus(CurvatureMatrix(m, n, entries))
            bhm = [bhm_cohomology(model, k, 0, k).dimension for k in range(m + n + 1)]
            ce = [ce_total_space(model, k) for k in range(m + n + 1)]
            assert bhm == ce, (m, n, entries, bhm, ce)
            if (m, n, entries) == (2, 1, ((1,),)):
                heis = ce
    assert heis == [1, 2, 2, 1]


def check_bhm_gysin():
    for (m, n), curvs in de_rham_models().items():
        for entries in curvs:
            model = InvariantModel.torus(CurvatureMatrix(m, n, entries))
            for lo in range(n):
                for hi in range(lo + 1, n + 1):
                    reps = bhm_gysin_check(model, range(0, m + n + 2), lo, hi)
                    bad = [r.summary() for r in reps if not r.exact]
                    assert not bad, bad


# 9 ------------------------------------------------------------------------

def check_mackey():
    for N in (2, 3, 5, 12):
        assert mackey_phi(list(weyl_pair(N))) == [Fraction(1, N)]


# 10 -----------------------------------------------------------------------

def check_xi_extraction():
    fx = weyl_fixtures()
    corrupted = 0
    for name, data in sorted(fx.items()):
        t = extract_xi_triple(data)
        assert d_F(t, data.twist).is_zero(), name
        rep = verify_gluing(data, t)
        assert rep.consistent and rep.checked > 0, name
        if not data.connectors:
            continue
        edge = sorted(data.connectors)[0]
        bad = data.with_connector(edge, data.connectors[edge] @ weyl(data.size, 1, 0))
        rep = verify_gluing(bad, t)
        assert not rep.consistent and all(set(edge) <= set(s) for s in rep.offending), (name, rep.offending)
        corrupted += 1
        if data.nerve.count(2):
            # the triangle products stop being scalar
            assert not verify_gluing(bad).consistent
            try:
                extract_xi_triple(bad)
            except ModelViolation:
                pass
            else:
                raise AssertionError(f"{name}: corrupted data was accepted")
    assert corrupted == 3


# 11 -----------------------------------------------------------------------

def check_classical_bockstein():
    nerve = fixture("projective6")
    sysN = CoefficientSystem("QmodZ", "scalar", 1, 2)
    hits = 0
    for v in mod_n_cocycles(coboundary_matrix(nerve, 1), nerve.count(1), 2):
        c = Cochain.from_vector(nerve, 1, sysN, [Fraction(x, 2) for x in v])
        r = cech_bockstein(c)
        assert r.group.torsion == (2,) and r.group.free_rank == 0
        if not r.is_zero:
            hits += 1
            assert r.coordinates == (1,)
            assert r.group.is_zero_class([2 * x for x in r.cocycle.to_vector()])
    assert hits > 0


# 12 -----------------------------------------------------------------------

def check_determinism():
    for prob in ("torus7_heisenberg.json", "projective6_n2.json"):
        cmd = [sys.executable, "-m", "dimredcech", "verify-all", str(ROOT / "problems" / prob), "--seed", "7", "--json"]
        a = subprocess.run(cmd, capture_output=True, check=True).stdout
        b = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert a and a == b, prob
        assert b'"all_pass": true' in a


CRITERIA = [
    ("01_d_squared_zero", check_d_squared),
    ("02_cf_coboundary_identity", check_cf_identity),
    ("03_f0_decomposition", check_f0_decomposition),
    ("04_integer_gysin_exactness", check_integer_exactness),
    ("05_coefficient_squares", check_squares),
    ("06_lemma4_vanishing", check_lemma4),
    ("07_bhm_matches_ce", check_bhm_ce),
    ("08_bhm_gysin_exactness", check_bhm_gysin),
    ("09_weyl_mackey_phase", check_mackey),
    ("10_xi_extraction_gluing", check_xi_extraction),
    ("11_classical_bockstein", check_classical_bockstein),
    ("12_verify_all_determinism", check_determinism),
]


def test_criterion_01_d_squared_zero():
    _timed(check_d_squared)


def test_criterion_02_cf_coboundary_identity():
    _timed(check_cf_identity)


def test_criterion_03_f0_decomposition():
    _timed(check_f0_decomposition)


def test_criterion_04_integer_gysin_exactness():
    _timed(check_integer_exactness)


def test_criterion_05_coefficient_squares():
    _timed(check_squares)


def test_criterion_06_lemma4_vanishing():
    _timed(check_lemma4)


def test_criterion_07_bhm_matches_ce():
    _timed(check_bhm_ce)


def test_criterion_08_bhm_gysin_exactness():
    _timed(check_bhm_gysin)


def test_criterion_09_weyl_mackey_phase():
    _timed(check_mackey)


def test_criterion_10_xi_extraction_gluing():
    _timed(check_xi_extraction)


def test_criterion_11_classical_bockstein():
    _timed(check_classical_bockstein)


def test_criterion_12_verify_all_determinism():
    _timed(check_determinism)


if __name__ == "__main__":
    failed = 0
    for name, fn in CRITERIA:
        try:
            dt = _timed(fn)
            print(f"PASS  {name}  ({dt:.2f}s)")
        except Exception as exc:  # report and continue
            failed += 1
            print(f"FAIL  {name}  {type(exc).__name__}: {exc}")
    sys.exit(1 if failed else 0)
