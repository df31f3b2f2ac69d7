"""Finite monomial-matrix models of commutator phases and unitary cocycle data.

Phases are additive: a phase p stands for exp(2πi·p) and is kept as a
Fraction in [0, 1).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .abelian import PreconditionError
from .dimred import DimRedCochain, TwistData, d_F
from .nerve import Cochain, CoefficientSystem, Nerve, cech_differential, mod1, pairs


class ModelViolation(ValueError):
    """Finite data that does not define the requested object."""


@dataclass(frozen=True)
class MonomialMatrix:
    """M e_j = exp(2πi·phases[j]) e_{perm[j]}."""

    perm: tuple
    phases: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"{perm} is not a permutation")
        if len(self.phases) != len(perm):
            raise ValueError("one phase per basis vector")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "phases", tuple(mod1(Fraction(p)) for p in self.phases))

    @property
    def size(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, N: int) -> "MonomialMatrix":
        return cls(tuple(range(N)), (0,) * N)

    @classmethod
    def scalar(cls, N: int, phase) -> "MonomialMatrix":
        return cls(tuple(range(N)), (phase,) * N)

    @classmethod
    def diagonal(cls, phases) -> "MonomialMatrix":
        return cls(tuple(range(len(phases))), tuple(phases))

    def __matmul__(self, other: "MonomialMatrix") -> "MonomialMatrix":
        if self.size != other.size:
            raise ValueError("size mismatch")
        perm = tuple(self.perm[other.perm[j]] for j in range(self.size))
        phases = tuple(other.phases[j] + self.phases[other.perm[j]] for j in range(self.size))
        return MonomialMatrix(perm, phases)

    def inverse(self) -> "MonomialMatrix":
        perm = [0] * self.size
        phases = [0] * self.size
        for j, pj in enumerate(self.perm):
            perm[pj] = j
            phases[pj] = -self.phases[j]
        return MonomialMatrix(tuple(perm), tuple(phases))

    def __pow__(self, e: int) -> "MonomialMatrix":
        base = self if e >= 0 else self.inverse()
        out = MonomialMatrix.identity(self.size)
        for _ in range(abs(e)):
            out = out @ base
        return out

    def scalar_phase(self) -> Optional[Fraction]:
        """The phase if this is a scalar matrix, else None."""
        if self.perm != tuple(range(self.size)) or len(set(self.phases)) != 1:
            return None
        return self.phases[0]

    def to_dense(self) -> list:
        """Entries as phases; None marks a zero entry."""
        out = [[None] * self.size for _ in range(self.size)]
        for j, pj in enumerate(self.perm):
            out[pj][j] = self.phases[j]
        return out

    def to_json(self) -> dict:
        return {"perm": list(self.perm), "phases": [str(p) for p in self.phases]}

    @classmethod
    def from_json(cls, obj) -> "MonomialMatrix":
        return cls(tuple(obj["perm"]), tuple(Fraction(p) for p in obj["phases"]))


def weyl_pair(N: int) -> tuple:
    """Clock diag(k/N) and shift e_k ↦ e_{k-1}; shift·clock·shift⁻¹·clock⁻¹ = 1/N."""
    if N < 2:
        raise ValueError("weyl_pair needs N >= 2")
    clock = MonomialMatrix.diagonal([Fraction(k, N) for k in range(N)])
    shift = MonomialMatrix(tuple((k - 1) % N for k in range(N)), (0,) * N)
    return clock, shift


def weyl(N: int, a: int, b: int) -> MonomialMatrix:
    """clock^a · shift^b."""
    c, s = weyl_pair(N)
    return (c ** a) @ (s ** b)


def _commutator_phase(x: MonomialMatrix, y: MonomialMatrix, what: str) -> Fraction:
    """Phase of x y x⁻¹ y⁻¹, which must be scalar."""
    p = (x @ y @ x.inverse() @ y.inverse()).scalar_phase()
    if p is None:
        raise ModelViolation(f"{what}: commutator is not scalar")
    return p


def mackey_phi(u: Sequence[MonomialMatrix]) -> list:
    """f_{ij}, i<j in lex pair order: the phase of u^j u^i (u^i u^j)⁻¹."""
    n = len(u)
    return [_commutator_phase(u[j], u[i], f"mackey_phi pair ({i}, {j})") for i, j in pairs(n)] if n > 1 else []


def _modulus_of(values) -> int:
    N = 1
    for v in values:
        N = lcm(N, Fraction(v).denominator)
    return N


def phillips_raeburn_eta(nerve: Nerve, u: dict, u_prime: dict) -> Cochain:
    """η_{λ0λ1}(e_i) = phase of u'_{λ1}^{e_i} (u_{λ0}^{e_i})⁻¹, as a vector(n) 1-cochain mod 1.

    ``u`` and ``u_prime`` map each vertex to its list of n commuting
    generators.
    """
    verts = nerve.simplices(0)
    n = len(u[verts[0][0]])
    for data in (u, u_prime):
        for (lam,) in verts:
            if any(f != 0 for f in mackey_phi(data[lam])):
                raise ModelViolation(f"generators at vertex {lam} do not commute")
    vals = {}
    for a, b in nerve.simplices(1):
        row = []
        for i in range(n):
            p = (u_prime[b][i] @ u[a][i].inverse()).scalar_phase()
            if p is None:
                raise ModelViolation(f"edge ({a}, {b}): generator {i} differs by a non-scalar")
            row.append(p)
        vals[(a, b)] = tuple(row)
    N = _modulus_of(x for v in vals.values() for x in v)
    return Cochain(nerve, 1, CoefficientSystem("QmodZ", "vector", n, N), vals)


@dataclass(frozen=True)
class GMatrix:
    """Constant strictly upper-triangular rational n×n matrix, stored on i<j pairs."""

    n: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.n * (self.n - 1) // 2:
            raise ValueError("one entry per pair i<j")
        object.__setattr__(self, "entries", tuple(Fraction(x) for x in self.entries))

    @classmethod
    def from_dense(cls, rows) -> "GMatrix":
        n = len(rows)
        for i in range(n):
            for j in range(i + 1):
                if Fraction(rows[i][j]) != 0:
                    raise ValueError("g must be strictly upper triangular")
        return cls(n, tuple(rows[i][j] for i, j in pairs(n)))

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.entries[pairs(self.n).index((i, j))]


@dataclass(frozen=True, eq=False)
class UnitaryCocycleData:
    """Per-vertex generators v[λ][i], per-edge connectors v[(λ0, λ1)], and s with ∂s integral."""

    nerve: Nerve
    n: int
    generators: dict
    connectors: dict
    s: Cochain
    twist: TwistData = field(init=False)

    def __post_init__(self):
        sizes = {m.size for gens in self.generators.values() for m in gens} | {m.size for m in self.connectors.values()}
        if len(sizes) > 1:
            raise ValueError("all matrices must have one size")
        for (lam,) in self.nerve.simplices(0):
            if len(self.generators.get(lam, ())) != self.n:
                raise ValueError(f"vertex {lam} needs {self.n} generators")
        for e in self.nerve.simplices(1):
            if e not in self.connectors:
                raise ValueError(f"edge {e} has no connector")
        object.__setattr__(self, "twist", TwistData.from_s(self.s))

    @property
    def size(self) -> int:
        return next(iter(self.connectors.values())).size if self.connectors else next(iter(self.generators.values()))[0].size

    def power(self, lam: int, m: Sequence[int]) -> MonomialMatrix:
        """v_λ^m = (v¹)^{m₁}···(vⁿ)^{mₙ}."""
        out = MonomialMatrix.identity(self.size)
        for g, e in zip(self.generators[lam], m):
            out = out @ (g ** e)
        return out

    def with_connector(self, edge, M: MonomialMatrix) -> "UnitaryCocycleData":
        conn = dict(self.connectors)
        conn[tuple(edge)] = M
        return UnitaryCocycleData(self.nerve, self.n, self.generators, conn, self.s)


def _e(n, l):
    return [1 if i == l else 0 for i in range(n)]


def _xi_expressions(data: UnitaryCocycleData):
    """Yield (slot, simplex, index, matrix) for every defining expression."""
    n, F = data.n, data.twist.F
    for (lam,) in data.nerve.simplices(0):
        v = data.generators[lam]
        for idx, (i, j) in enumerate(pairs(n)):
            yield "bot", (lam,), idx, v[j] @ v[i] @ v[j].inverse() @ v[i].inverse()
    for a, b in data.nerve.simplices(1):
        c = data.connectors[(a, b)]
        for l in range(n):
            m = _e(n, l)
            yield "mid", (a, b), l, data.power(b, m) @ c @ data.power(a, m).inverse() @ c.inverse()
    for a, b, c in data.nerve.simplices(2):
        minus_f = [-x for x in F.value((a, b, c))]
        M = data.connectors[(b, c)] @ data.connectors[(a, b)] @ data.power(a, minus_f).inverse() @ data.connectors[(a, c)].inverse()
        yield "top", (a, b, c), 0, M


def _assemble(nerve, n, slots, ring="Q", modulus=None) -> DimRedCochain:
    top = Cochain(nerve, 2, CoefficientSystem(ring, "scalar", 1, modulus), slots["top"])
    mid = Cochain(nerve, 1, CoefficientSystem(ring, "vector", n, modulus), slots["mid"])
    bot = Cochain(nerve, 0, CoefficientSystem(ring, "upper", n, modulus), slots["bot"])
    return DimRedCochain(2, n, top, mid, bot)


def _to_mod1(triple_q: DimRedCochain) -> DimRedCochain:
    N = _modulus_of(x for c in triple_q.slots() for v in c.values.values() for x in v)
    return triple_q.with_ring("QmodZ", N)


def extract_xi_triple(data: UnitaryCocycleData) -> DimRedCochain:
    """(φ²⁰, φ¹¹, φ⁰²) as a Q/Z triple; raises ModelViolation on non-scalar expressions."""
    n = data.n
    slots = {"top": {}, "mid": {}, "bot": {}}
    width = {"top": 1, "mid": n, "bot": n * (n - 1) // 2}
    for slot, simplex, idx, M in _xi_expressions(data):
        p = M.scalar_phase()
        if p is None:
            raise ModelViolation(f"{slot} expression at {simplex} (index {idx}) is not scalar")
        slots[slot].setdefault(simplex, [0] * width[slot])[idx] = p
    # φ¹¹ must be a homomorphism ℤⁿ → 𝕋: check it on pairs of generators.
    for a, b in data.nerve.simplices(1):
        c = data.connectors[(a, b)]
        vals = slots["mid"].get((a, b), [0] * n)
        for i in range(n):
            for j in range(n):
                m = [x + y for x, y in zip(_e(n, i), _e(n, j))]
                p = (data.power(b, m) @ c @ data.power(a, m).inverse() @ c.inverse()).scalar_phase()
                if p is None or mod1(p - vals[i] - vals[j]) != 0:
                    raise ModelViolation(f"edge ({a}, {b}): conjugation phase is not additive on e_{i} + e_{j}")
    triple = _to_mod1(_assemble(data.nerve, n, {k: {s: tuple(v) for s, v in d.items()} for k, d in slots.items()}))
    if not d_F(triple, data.twist).is_zero():
        raise AssertionError("extracted triple is not D-closed")
    return triple


def lemma4_triple(g: GMatrix, twist: TwistData) -> DimRedCochain:
    """The triple built from a constant g and the cochain s of the twist, reduced mod 1."""
    if twist.s is None:
        raise PreconditionError("twist carries no s")
    n = twist.n
    if g.n != n:
        raise ValueError("g and twist disagree on n")
    s, F = twist.s, twist.F
    P = pairs(n)
    nerve = twist.nerve
    bot = {(lam,): g.entries for (lam,) in nerve.simplices(0)}
    mid = {}
    for e in nerve.simplices(1):
        se = s.value(e)
        row = [Fraction(0)] * n
        for gij, (i, j) in zip(g.entries, P):
            row[i] += gij * se[j]
            row[j] -= gij * se[i]
        mid[e] = tuple(row)
    top = {}
    for a, b, c in nerve.simplices(2):
        s01, s12, s02, f = s.value((a, b)), s.value((b, c)), s.value((a, c)), F.value((a, b, c))
        top[(a, b, c)] = (sum(gij * (s01[i] * s12[j] - f[i] * s02[j]) for gij, (i, j) in zip(g.entries, P)),)
    triple = _to_mod1(_assemble(nerve, n, {"top": top, "mid": mid, "bot": bot}))
    if not d_F(triple, twist).is_zero():
        raise AssertionError("lemma4 triple is not D-closed")
    return triple


@dataclass
class GluingReport:
    consistent: bool
    checked: int
    offending: list

    def summary(self) -> dict:
        return {"consistent": self.consistent, "checked": self.checked,
                "offending": [list(s) for s in self.offending]}


def verify_gluing(data: UnitaryCocycleData, triple: Optional[DimRedCochain] = None) -> GluingReport:
    """Every defining expression must equal the scalar recorded in ``triple``.

    Offending simplices are collected rather than raised.  Without a triple
    the expressions only need to be scalar.
    """
    bad, checked = [], 0
    for slot, simplex, idx, M in _xi_expressions(data):
        checked += 1
        p = M.scalar_phase()
        ok = p is not None
        if ok and triple is not None:
            c = getattr(triple, slot)
            ok = mod1(p) == mod1(c.value(simplex)[idx])
        if not ok and simplex not in bad:
            bad.append(simplex)
    return GluingReport(not bad, checked, bad)


# ---------------------------------------------------------------- fixtures


def weyl_single_patch(N: int) -> UnitaryCocycleData:
    """One patch, v¹ = clock, v² = shift, F = 0, s = 0."""
    nerve = Nerve([(0,)])
    c, sh = weyl_pair(N)
    s = Cochain(nerve, 1, CoefficientSystem("Q", "vector", 2))
    return UnitaryCocycleData(nerve, 2, {0: (c, sh)}, {}, s)


def weyl_data(nerve: Nerve, N: int, s_int: Cochain, exponents: dict) -> UnitaryCocycleData:
    """Clock/shift generators everywhere; connectors clock^a shift^b chosen to make φ²⁰ scalar.

    ``s_int`` is an integral vector(2) 1-cochain (F = ∂s_int) and
    ``exponents`` maps vertices to (a, b); connector exponents are
    ∂exponents − s_int, so that the triangle products are scalar.
    """
    c, sh = weyl_pair(N)
    gens = {lam: (c, sh) for (lam,) in nerve.simplices(0)}
    conn = {}
    for a, b in nerve.simplices(1):
        ea, eb = exponents.get(a, (0, 0)), exponents.get(b, (0, 0))
        sv = s_int.value((a, b))
        conn[(a, b)] = weyl(N, eb[0] - ea[0] - sv[0], eb[1] - ea[1] - sv[1])
    return UnitaryCocycleData(nerve, 2, gens, conn, s_int.with_ring("Q"))


def weyl_fixtures() -> dict:
    """Shipped Weyl data sets keyed by name."""
    from .nerve import fixture

    out = {}
    for N in (2, 3, 5):
        out[f"single_patch_N{N}"] = weyl_single_patch(N)
    rng = random.Random(20240601)
    for name, N in (("circle3", 3), ("sphere_tetra", 4), ("torus7", 5)):
        nerve = fixture(name)
        vs = CoefficientSystem("Z", "vector", 2)
        s_int = Cochain(nerve, 1, vs, {e: (rng.randint(-2, 2), rng.randint(-2, 2)) for e in nerve.simplices(1)})
        exps = {lam: (rng.randrange(N), rng.randrange(N)) for (lam,) in nerve.simplices(0)}
        out[f"{name}_N{N}"] = weyl_data(nerve, N, s_int, exps)
    return out


def random_rational_s(nerve: Nerve, n: int, rng: random.Random, max_den: int = 4) -> Cochain:
    """Random rational vector(n) 1-cochain whose coboundary is integral.

    Sum of (∂w)/d for a random integer 0-cochain w, a random integer
    1-cochain, and, when Ȟ²(ℤ) has torsion, random multiples of x/d with
    ∂x = d·t for a torsion generator t of order d.  The last part makes F
    a nontrivial torsion Euler class.
    """
    from .abelian import solve_integer
    from .nerve import cech_cohomology, coboundary_matrix

    d = rng.randint(1, max_den)
    sysZ = CoefficientSystem("Z", "vector", n)
    w = Cochain(nerve, 0, sysZ, {v: tuple(rng.randint(-3, 3) for _ in range(n)) for v in nerve.simplices(0)})
    u = Cochain(nerve, 1, sysZ, {e: tuple(rng.randint(-2, 2) for _ in range(n)) for e in nerve.simplices(1)})
    s = Fraction(1, d) * cech_differential(w).with_ring("Q") + u.with_ring("Q")
    h2 = cech_cohomology(nerve, "Z", 2)
    if h2.torsion:
        D1 = coboundary_matrix(nerve, 1)
        for order, t in zip(h2.torsion, h2.generators):
            x = solve_integer(D1, [order * c for c in t])
            comps = []
            for _ in range(n):
                m = rng.randrange(order)
                comps.append(Cochain.from_vector(nerve, 1, "Q", [Fraction(m * c, order) for c in x]))
            s = s + Cochain.stack(comps, "vector", n)
    return s


def random_gmatrix(n: int, rng: random.Random, max_den: int = 6) -> GMatrix:
    return GMatrix(n, tuple(Fraction(rng.randint(-5, 5), rng.randint(1, max_den)) for _ in range(n * (n - 1) // 2)))
