"""Three-column dimensionally reduced Čech complexes.

A degree-k cochain is a triple ``(top, mid, bot)`` with ``top`` a scalar
k-cochain, ``mid`` a ℤⁿ-valued (k-1)-cochain and ``bot`` an
upper-triangular-valued (k-2)-cochain.  The twisted differential is

    D_F(top, mid, bot) = (∂top + (-1)^{k+1} mid∪₁F + (-1)^{k+1} bot∪₂C(F),
                          ∂mid + (-1)^k bot∪₁F,
                          ∂bot)

The truncated complex keeps only ``(mid, bot)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .abelian import FpAbelianGroup, IntMatrix, PreconditionError, homology_quotient
from .nerve import (
    Cochain,
    CoefficientSystem,
    Nerve,
    UnsupportedRingError,
    cech_differential,
    pair_index,
    pairs,
    rationalize,
)


def _sys(ring: str, shape: str, n: int, modulus=None) -> CoefficientSystem:
    return CoefficientSystem(ring, shape, n, modulus if ring == "QmodZ" else None)


def c_of_f(F: Cochain) -> Cochain:
    """C(F)_{λ0λ1λ2λ3, ij} = F_{λ0λ1λ2,i} F_{λ0λ2λ3,j} - F_{λ1λ2λ3,i} F_{λ0λ1λ3,j}."""
    if F.degree != 2 or F.system.shape != "vector" or F.system.ring != "Z":
        raise ValueError("C(F) needs an integral vector(n) 2-cochain")
    if not cech_differential(F).is_zero():
        raise PreconditionError("F is not a cocycle")
    n = F.system.n
    out = {}
    if n > 1 and F.values:
        P = pairs(n)
        for s in F.nerve.simplices(3):
            a, b, c, d = s
            f012, f023 = F.values.get((a, b, c)), F.values.get((a, c, d))
            f123, f013 = F.values.get((b, c, d)), F.values.get((a, b, d))
            if (f012 is None or f023 is None) and (f123 is None or f013 is None):
                continue
            val = []
            for i, j in P:
                x = f012[i] * f023[j] if f012 is not None and f023 is not None else 0
                y = f123[i] * f013[j] if f123 is not None and f013 is not None else 0
                val.append(x - y)
            out[s] = tuple(val)
    return Cochain(F.nerve, 3, _sys("Z", "upper", n), out)


@dataclass(frozen=True, eq=False)
class TwistData:
    """Integral Euler-class cocycle F with its C(F); optionally a rational s with ∂s = F."""

    n: int
    F: Cochain
    CF: Cochain
    s: Optional[Cochain] = None

    @classmethod
    def from_cocycle(cls, F: Cochain, s: Optional[Cochain] = None) -> "TwistData":
        if F.degree != 2 or F.system.shape != "vector" or F.system.ring != "Z":
            raise ValueError("F must be an integral vector(n) 2-cochain")
        if s is not None and cech_differential(s.with_ring("Q")) != F.with_ring("Q"):
            raise PreconditionError("∂s != F")
        return cls(F.system.n, F, c_of_f(F), s)

    @classmethod
    def from_s(cls, s: Cochain) -> "TwistData":
        """Twist F := ∂s for a rational 1-cochain s; ∂s must be integral."""
        if s.degree != 1 or s.system.shape != "vector":
            raise ValueError("s must be a vector(n) 1-cochain")
        ds = cech_differential(s.with_ring("Q"))
        try:
            F = ds.with_ring("Z")
        except ValueError:
            raise PreconditionError("∂s is not integral") from None
        return cls(s.system.n, F, c_of_f(F), s.with_ring("Q"))

    @classmethod
    def zero(cls, nerve: Nerve, n: int) -> "TwistData":
        return cls.from_cocycle(Cochain(nerve, 2, _sys("Z", "vector", n)))

    @classmethod
    def from_scalar_cocycles(cls, components) -> "TwistData":
        comps = [c.with_ring("Z") for c in components]
        return cls.from_cocycle(Cochain.stack(comps, "vector", len(comps)))

    @property
    def nerve(self) -> Nerve:
        return self.F.nerve


def cup1_vec(phi: Cochain, F: Cochain) -> Cochain:
    """(φ ∪₁ F)_{λ0..λ_{k+1}} = Σ_l φ_{λ0..λ_{k-1}, l} F_{λ_{k-1}λ_kλ_{k+1}, l}."""
    if phi.system.shape != "vector" or phi.system.n != F.system.n:
        raise ValueError("cup1_vec needs a vector(n) cochain matching F")
    p = phi.degree
    sys = phi.system.with_shape("scalar")
    out = {}
    if phi.values and F.values:
        for s in phi.nerve.simplices(p + 2):
            x = phi.values.get(s[:p + 1])
            if x is None:
                continue
            f = F.values.get(s[p:])
            if f is None:
                continue
            out[s] = (sum(a * b for a, b in zip(x, f)),)
    return Cochain(phi.nerve, p + 2, sys, out)


def cup1_mat(phi: Cochain, F: Cochain) -> Cochain:
    """(φ ∪₁ F)_{λ0..λk, l} = Σ_{i<l} φ_{il} F_i - Σ_{l<j} φ_{lj} F_j, F on the last three vertices."""
    n = F.system.n
    if phi.system.shape != "upper" or phi.system.n != n:
        raise ValueError("cup1_mat needs an upper(n) cochain matching F")
    p = phi.degree
    sys = phi.system.with_shape("vector")
    out = {}
    if n > 1 and phi.values and F.values:
        P = pairs(n)
        for s in phi.nerve.simplices(p + 2):
            x = phi.values.get(s[:p + 1])
            if x is None:
                continue
            f = F.values.get(s[p:])
            if f is None:
                continue
            val = [0] * n
            for idx, (i, j) in enumerate(P):
                if x[idx]:
                    val[j] += x[idx] * f[i]
                    val[i] -= x[idx] * f[j]
            out[s] = tuple(val)
    return Cochain(phi.nerve, p + 2, sys, out)


def cup2(phi: Cochain, CF: Cochain) -> Cochain:
    """(φ ∪₂ C(F))_{λ0..λ_{k+1}} = Σ_{i<j} φ_{λ0..λ_{k-2}, ij} C(F)_{λ_{k-2}..λ_{k+1}, ij}."""
    if phi.system.shape != "upper" or CF.system.shape != "upper" or phi.system.n != CF.system.n:
        raise ValueError("cup2 needs matching upper(n) cochains")
    p = phi.degree
    sys = phi.system.with_shape("scalar")
    out = {}
    if phi.values and CF.values:
        for s in phi.nerve.simplices(p + 3):
            x = phi.values.get(s[:p + 1])
            if x is None:
                continue
            c = CF.values.get(s[p:])
            if c is None:
                continue
            out[s] = (sum(a * b for a, b in zip(x, c)),)
    return Cochain(phi.nerve, p + 3, sys, out)


@dataclass(frozen=True, eq=False)
class DimRedCochain:
    """Triple (φ^{k0}, φ^{(k-1)1}, φ^{(k-2)2}); absent slots are None."""

    k: int
    n: int
    top: Cochain
    mid: Optional[Cochain] = None
    bot: Optional[Cochain] = None

    def __post_init__(self):
        if self.top.degree != self.k or self.top.system.shape != "scalar":
            raise ValueError("top slot must be a scalar k-cochain")
        if (self.mid is not None) != (self.k >= 1) or (self.bot is not None) != (self.k >= 2):
            raise ValueError(f"slot presence does not match degree {self.k}")
        if self.mid is not None and (self.mid.degree != self.k - 1 or self.mid.system.shape != "vector"):
            raise ValueError("mid slot must be a vector (k-1)-cochain")
        if self.bot is not None and (self.bot.degree != self.k - 2 or self.bot.system.shape != "upper"):
            raise ValueError("bot slot must be an upper (k-2)-cochain")
        rings = {c.system.with_shape("scalar") for c in self.slots()}
        if len(rings) != 1:
            raise ValueError("all slots must share one ring")

    def slots(self) -> list:
        return [c for c in (self.top, self.mid, self.bot) if c is not None]

    @property
    def nerve(self) -> Nerve:
        return self.top.nerve

    @property
    def ring(self) -> str:
        return self.top.system.ring

    @property
    def modulus(self):
        return self.top.system.modulus

    @classmethod
    def zero(cls, nerve: Nerve, k: int, n: int, ring: str = "Z", modulus=None) -> "DimRedCochain":
        top = Cochain(nerve, k, _sys(ring, "scalar", 1, modulus))
        mid = Cochain(nerve, k - 1, _sys(ring, "vector", n, modulus)) if k >= 1 else None
        bot = Cochain(nerve, k - 2, _sys(ring, "upper", n, modulus)) if k >= 2 else None
        return cls(k, n, top, mid, bot)

    @classmethod
    def build(cls, nerve, k, n, top=None, mid=None, bot=None, ring="Z", modulus=None) -> "DimRedCochain":
        z = cls.zero(nerve, k, n, ring, modulus)
        return cls(k, n, top if top is not None else z.top,
                   mid if mid is not None else z.mid, bot if bot is not None else z.bot)

    def _map(self, fn) -> "DimRedCochain":
        return DimRedCochain(self.k, self.n, *[fn(c) if c is not None else None for c in (self.top, self.mid, self.bot)])

    def __add__(self, other):
        return DimRedCochain(self.k, self.n, *[a + b if a is not None else None for a, b in
                                               zip((self.top, self.mid, self.bot), (other.top, other.mid, other.bot))])

    def __neg__(self):
        return self._map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return self._map(lambda x: c * x)

    def __eq__(self, other):
        return isinstance(other, DimRedCochain) and self.k == other.k and self.slots() == other.slots()

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.slots())

    def with_ring(self, ring: str, modulus=None) -> "DimRedCochain":
        return self._map(lambda c: c.with_ring(ring, modulus))

    def to_vector(self) -> list:
        out = []
        for c in self.slots():
            out.extend(c.to_vector())
        return out

    @classmethod
    def from_vector(cls, nerve, k, n, vec, ring="Z", modulus=None) -> "DimRedCochain":
        z = cls.zero(nerve, k, n, ring, modulus)
        parts, pos = [], 0
        for c in z.slots():
            parts.append(Cochain.from_vector(nerve, c.degree, c.system, vec[pos:pos + c.dim]))
            pos += c.dim
        if pos != len(vec):
            raise ValueError("vector length does not match degree-k triple space")
        parts += [None] * (3 - len(parts))
        return cls(k, n, *parts)

    def __repr__(self):
        return f"DimRedCochain(k={self.k}, n={self.n}, ring={self.ring}, support={[len(c.values) for c in self.slots()]})"


@dataclass(frozen=True, eq=False)
class TruncatedCochain:
    """Pair (φ^{k1}, φ^{(k-1)2}); degree 0 carries only ``mid``."""

    k: int
    n: int
    mid: Cochain
    bot: Optional[Cochain] = None

    def __post_init__(self):
        if self.mid.degree != self.k or self.mid.system.shape != "vector":
            raise ValueError("mid slot must be a vector k-cochain")
        if (self.bot is not None) != (self.k >= 1):
            raise ValueError(f"slot presence does not match degree {self.k}")
        if self.bot is not None and (self.bot.degree != self.k - 1 or self.bot.system.shape != "upper"):
            raise ValueError("bot slot must be an upper (k-1)-cochain")

    def slots(self) -> list:
        return [c for c in (self.mid, self.bot) if c is not None]

    @property
    def nerve(self) -> Nerve:
        return self.mid.nerve

    @property
    def ring(self) -> str:
        return self.mid.system.ring

    @classmethod
    def zero(cls, nerve, k, n, ring="Z", modulus=None) -> "TruncatedCochain":
        mid = Cochain(nerve, k, _sys(ring, "vector", n, modulus))
        bot = Cochain(nerve, k - 1, _sys(ring, "upper", n, modulus)) if k >= 1 else None
        return cls(k, n, mid, bot)

    def _map(self, fn):
        return TruncatedCochain(self.k, self.n, fn(self.mid), fn(self.bot) if self.bot is not None else None)

    def __add__(self, other):
        return TruncatedCochain(self.k, self.n, self.mid + other.mid,
                                self.bot + other.bot if self.bot is not None else None)

    def __neg__(self):
        return self._map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return self._map(lambda x: c * x)

    def __eq__(self, other):
        return isinstance(other, TruncatedCochain) and self.k == other.k and self.slots() == other.slots()

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.slots())

    def with_ring(self, ring, modulus=None):
        return self._map(lambda c: c.with_ring(ring, modulus))

    def to_vector(self) -> list:
        out = []
        for c in self.slots():
            out.extend(c.to_vector())
        return out

    @classmethod
    def from_vector(cls, nerve, k, n, vec, ring="Z", modulus=None) -> "TruncatedCochain":
        z = cls.zero(nerve, k, n, ring, modulus)
        parts, pos = [], 0
        for c in z.slots():
            parts.append(Cochain.from_vector(nerve, c.degree, c.system, vec[pos:pos + c.dim]))
            pos += c.dim
        if pos != len(vec):
            raise ValueError("vector length does not match truncated space")
        return cls(k, n, parts[0], parts[1] if len(parts) > 1 else None)


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


def _check_twist(c, twist: TwistData):
    if c.n != twist.n:
        raise ValueError(f"cochain has n={c.n} but twist has n={twist.n}")


def d_F(c: DimRedCochain, twist: TwistData) -> DimRedCochain:
    """Twisted differential D_F on a degree-k triple; absent slots count as zero."""
    _check_twist(c, twist)
    k, F, CF = c.k, twist.F, twist.CF
    top = cech_differential(c.top)
    if c.mid is not None:
        top = top + _sign(k + 1) * cup1_vec(c.mid, F)
    if c.bot is not None:
        top = top + _sign(k + 1) * cup2(c.bot, CF)
    if c.mid is not None:
        mid = cech_differential(c.mid)
        if c.bot is not None:
            mid = mid + _sign(k) * cup1_mat(c.bot, F)
    else:
        mid = Cochain(c.nerve, 0, _sys(c.ring, "vector", c.n, c.modulus))
    if k + 1 >= 2:
        bot = cech_differential(c.bot) if c.bot is not None else Cochain(c.nerve, 0, _sys(c.ring, "upper", c.n, c.modulus))
    else:
        bot = None
    return DimRedCochain(k + 1, c.n, top, mid, bot)


def d_bar_F(c: TruncatedCochain, twist: TwistData) -> TruncatedCochain:
    """Differential of the truncated complex.

    The sign on ``bot ∪₁ F`` is ``(-1)^{k+1}`` for ``mid`` of degree k, so
    that dropping the top slot commutes with the differentials.
    """
    _check_twist(c, twist)
    k = c.k
    mid = cech_differential(c.mid)
    if c.bot is not None:
        mid = mid + _sign(k + 1) * cup1_mat(c.bot, twist.F)
        bot = cech_differential(c.bot)
    else:
        bot = Cochain(c.nerve, 0, _sys(c.ring, "upper", c.n, c.mid.system.modulus))
    return TruncatedCochain(k + 1, c.n, mid, bot)


class DimRedComplex:
    """Integer matrices and cohomology of the twisted complex on one nerve."""

    def __init__(self, twist: TwistData):
        self.twist = twist
        self.nerve = twist.nerve
        self.n = twist.n

    def dim(self, k: int) -> int:
        if k < 0:
            return 0
        return len(DimRedCochain.zero(self.nerve, k, self.n).to_vector())

    def bar_dim(self, k: int) -> int:
        if k < 0:
            return 0
        return len(TruncatedCochain.zero(self.nerve, k, self.n).to_vector())

    @lru_cache(maxsize=None)
    def matrix(self, k: int) -> IntMatrix:
        """D_F from degree k to k+1."""
        rows = self.dim(k + 1)
        if k < 0:
            return IntMatrix.zeros(rows, 0)
        cols = []
        for j in range(self.dim(k)):
            e = [0] * self.dim(k)
            e[j] = 1
            cols.append(d_F(DimRedCochain.from_vector(self.nerve, k, self.n, e), self.twist).to_vector())
        return IntMatrix.from_columns(cols, rows)

    @lru_cache(maxsize=None)
    def bar_matrix(self, k: int) -> IntMatrix:
        rows = self.bar_dim(k + 1)
        if k < 0:
            return IntMatrix.zeros(rows, 0)
        cols = []
        for j in range(self.bar_dim(k)):
            e = [0] * self.bar_dim(k)
            e[j] = 1
            cols.append(d_bar_F(TruncatedCochain.from_vector(self.nerve, k, self.n, e), self.twist).to_vector())
        return IntMatrix.from_columns(cols, rows)

    @lru_cache(maxsize=None)
    def _cohomology_z(self, k: int) -> FpAbelianGroup:
        return homology_quotient(self.matrix(k), self.matrix(k - 1))

    @lru_cache(maxsize=None)
    def _bar_cohomology_z(self, k: int) -> FpAbelianGroup:
        return homology_quotient(self.bar_matrix(k), self.bar_matrix(k - 1))

    def cohomology(self, k: int, ring: str = "Z") -> FpAbelianGroup:
        _check_ring(ring)
        if k < 0:
            return FpAbelianGroup(0)
        g = self._cohomology_z(k)
        return rationalize(g) if ring == "Q" else g

    def bar_cohomology(self, k: int, ring: str = "Z") -> FpAbelianGroup:
        _check_ring(ring)
        if k < 0:
            return FpAbelianGroup(0)
        g = self._bar_cohomology_z(k)
        return rationalize(g) if ring == "Q" else g

    def generator_triples(self, k: int, ring: str = "Z") -> list:
        return [DimRedCochain.from_vector(self.nerve, k, self.n, list(g), ring) for g in self.cohomology(k, ring).generators]


def _check_ring(ring: str):
    if ring not in ("Z", "Q"):
        raise UnsupportedRingError(
            f"ring {ring!r}: Q/Z cohomology is not computed as a group; feed mod-1 cocycles to gysin.bockstein_zigzag"
        )


def dimred_cohomology(nerve: Nerve, twist: TwistData, ring: str, k: int) -> FpAbelianGroup:
    """ℍ^k_F(nerve) over Z or Q."""
    if twist.nerve != nerve:
        raise ValueError("twist lives on a different nerve")
    return DimRedComplex(twist).cohomology(k, ring)


def dimred_bar_cohomology(nerve: Nerve, twist: TwistData, ring: str, k: int) -> FpAbelianGroup:
    """Cohomology of the truncated complex at degree k."""
    if twist.nerve != nerve:
        raise ValueError("twist lives on a different nerve")
    return DimRedComplex(twist).bar_cohomology(k, ring)


def upper_pair(i: int, j: int, n: int) -> int:
    """0-based position of entry (i, j), i < j, inside an upper(n) value."""
    return pair_index(i, j, n)
