"""Finite nerves, Čech cochains, the Čech differential, cup and cup-1 products.

Cochains live on ordered simplices (strictly increasing vertex tuples) and
are locally constant: one coefficient value per simplex.  Values are
stored as tuples whose width depends on the coefficient shape:

* ``scalar``: width 1
* ``vector(n)``: width n
* ``upper(n)``: width n(n-1)/2, entry ``(i, j)`` with ``i < j`` at
  :func:`pair_index` ``(i, j, n)``
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .abelian import FpAbelianGroup, IntMatrix, PreconditionError, homology_quotient

RINGS = ("Z", "Q", "QmodZ")
SHAPES = ("scalar", "vector", "upper")


class UnsupportedRingError(ValueError):
    pass


def pair_index(i: int, j: int, n: int) -> int:
    """Position of the pair ``i < j`` (0-based) in lexicographic order."""
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def pairs(n: int) -> list:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def mod1(x) -> Fraction:
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


class Nerve:
    """Finite simplicial complex on vertices ``0..vertex_count-1``.

    Built from maximal simplices; all faces are added.
    """

    def __init__(self, maximal: Iterable[Sequence[int]], vertex_count: Optional[int] = None):
        faces = set()
        top = []
        for s in maximal:
            s = tuple(sorted(int(v) for v in s))
            if len(set(s)) != len(s) or not s:
                raise ValueError(f"degenerate simplex {s}")
            top.append(s)
            for r in range(1, len(s) + 1):
                faces.update(combinations(s, r))
        verts = {v for s in faces for v in s}
        if vertex_count is None:
            vertex_count = max(verts) + 1 if verts else 0
        if any(v < 0 or v >= vertex_count for v in verts):
            raise ValueError("vertex label out of range")
        faces.update((v,) for v in range(vertex_count))
        self.vertex_count = vertex_count
        dim = max((len(s) for s in faces), default=0) - 1
        self._simplices = [sorted(s for s in faces if len(s) == k + 1) for k in range(dim + 1)]
        self._index = [{s: i for i, s in enumerate(lst)} for lst in self._simplices]

    @property
    def dimension(self) -> int:
        return len(self._simplices) - 1

    def simplices(self, k: int) -> list:
        if 0 <= k < len(self._simplices):
            return self._simplices[k]
        return []

    def count(self, k: int) -> int:
        return len(self.simplices(k))

    def index(self, k: int, simplex: tuple) -> int:
        return self._index[k][simplex]

    def contains(self, simplex: Sequence[int]) -> bool:
        s = tuple(simplex)
        k = len(s) - 1
        return 0 <= k < len(self._index) and s in self._index[k]

    def maximal_simplices(self) -> list:
        out = []
        for k in range(self.dimension, -1, -1):
            for s in self.simplices(k):
                if not any(set(s) < set(t) for t in out):
                    out.append(s)
        return sorted(out)

    def f_vector(self) -> tuple:
        return tuple(len(lst) for lst in self._simplices)

    def __eq__(self, other):
        return isinstance(other, Nerve) and self._simplices == other._simplices and self.vertex_count == other.vertex_count

    def __hash__(self):
        return hash(tuple(tuple(lst) for lst in self._simplices))

    def __repr__(self):
        return f"Nerve(f_vector={self.f_vector()})"


@dataclass(frozen=True)
class CoefficientSystem:
    ring: str = "Z"
    shape: str = "scalar"
    n: int = 1
    modulus: Optional[int] = None

    def __post_init__(self):
        if self.ring not in RINGS:
            raise ValueError(f"unknown ring {self.ring!r}")
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.ring == "QmodZ":
            if self.modulus is None or self.modulus < 1:
                raise ValueError("QmodZ needs a modulus N >= 1")
        elif self.modulus is not None:
            object.__setattr__(self, "modulus", None)
        if self.shape == "scalar" and self.n != 1:
            object.__setattr__(self, "n", 1)

    @property
    def width(self) -> int:
        if self.shape == "scalar":
            return 1
        if self.shape == "vector":
            return self.n
        return self.n * (self.n - 1) // 2

    def with_ring(self, ring: str, modulus: Optional[int] = None) -> "CoefficientSystem":
        return CoefficientSystem(ring, self.shape, self.n, modulus)

    def with_shape(self, shape: str) -> "CoefficientSystem":
        return CoefficientSystem(self.ring, shape, self.n, self.modulus)

    def normalize(self, x):
        if self.ring == "Z":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError(f"non-integer value {x} in Z cochain")
                return x.numerator
            if isinstance(x, int):
                return x
            raise TypeError(f"unsupported value {x!r}")
        x = Fraction(x)
        if self.ring == "Q":
            return x
        if self.modulus % x.denominator:
            raise ValueError(f"value {x} has denominator not dividing {self.modulus}")
        return mod1(x)

    def __str__(self):
        ring = f"QmodZ({self.modulus})" if self.ring == "QmodZ" else self.ring
        shape = self.shape if self.shape == "scalar" else f"{self.shape}({self.n})"
        return f"{ring}/{shape}"


Z = CoefficientSystem("Z")
Q = CoefficientSystem("Q")


def _parse_system(system) -> CoefficientSystem:
    return system if isinstance(system, CoefficientSystem) else CoefficientSystem(system)


class Cochain:
    """Degree-k cochain on a nerve; missing simplices carry zero."""

    __slots__ = ("nerve", "degree", "system", "values")

    def __init__(self, nerve: Nerve, degree: int, system, values: Optional[Mapping] = None):
        system = _parse_system(system)
        self.nerve = nerve
        self.degree = degree
        self.system = system
        w = system.width
        vals = {}
        for s, v in (values or {}).items():
            s = tuple(s)
            if len(s) != degree + 1 or not nerve.contains(s):
                raise ValueError(f"{s} is not a {degree}-simplex of the nerve")
            if not isinstance(v, (tuple, list)):
                v = (v,)
            if len(v) != w:
                raise ValueError(f"value {v} has width {len(v)}, expected {w}")
            v = tuple(system.normalize(x) for x in v)
            if any(v):
                vals[s] = v
        self.values = vals

    @classmethod
    def zero(cls, nerve, degree, system) -> "Cochain":
        return cls(nerve, degree, system)

    @classmethod
    def from_vector(cls, nerve, degree, system, vec: Sequence) -> "Cochain":
        system = _parse_system(system)
        w = system.width
        simplices = nerve.simplices(degree) if degree >= 0 else []
        if len(vec) != w * len(simplices):
            raise ValueError("vector length does not match cochain space")
        return cls(nerve, degree, system, {s: tuple(vec[w * i:w * i + w]) for i, s in enumerate(simplices)})

    def to_vector(self) -> list:
        w = self.system.width
        zero = (0,) * w
        out = []
        for s in self.nerve.simplices(self.degree) if self.degree >= 0 else []:
            out.extend(self.values.get(s, zero))
        return out

    @property
    def dim(self) -> int:
        return self.system.width * (self.nerve.count(self.degree) if self.degree >= 0 else 0)

    def __getitem__(self, simplex):
        v = self.values.get(tuple(simplex))
        if v is None:
            v = (0,) * self.system.width
        return v[0] if self.system.shape == "scalar" else v

    def value(self, simplex) -> tuple:
        return self.values.get(tuple(simplex), (0,) * self.system.width)

    def is_zero(self) -> bool:
        return not self.values

    def _check_compatible(self, other):
        if self.nerve is not other.nerve and self.nerve != other.nerve:
            raise ValueError("cochains on different nerves")
        if self.degree != other.degree or self.system != other.system:
            raise ValueError(f"incompatible cochains: {self.degree}/{self.system} vs {other.degree}/{other.system}")

    def __add__(self, other):
        self._check_compatible(other)
        vals = dict(self.values)
        for s, v in other.values.items():
            a = vals.get(s)
            vals[s] = v if a is None else tuple(x + y for x, y in zip(a, v))
        return Cochain(self.nerve, self.degree, self.system, vals)

    def __neg__(self):
        return Cochain(self.nerve, self.degree, self.system, {s: tuple(-x for x in v) for s, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, c):
        return Cochain(self.nerve, self.degree, self.system, {s: tuple(c * x for x in v) for s, v in self.values.items()})

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.degree == other.degree and self.system == other.system and self.values == other.values

    def __hash__(self):
        return hash((self.degree, self.system, frozenset(self.values.items())))

    def __repr__(self):
        return f"Cochain(degree={self.degree}, system={self.system}, support={len(self.values)})"

    def with_ring(self, ring: str, modulus: Optional[int] = None) -> "Cochain":
        """Coefficient change (Z -> Q inclusion, Q -> Q/Z reduction, Q/Z -> Q lift to [0, 1))."""
        return Cochain(self.nerve, self.degree, self.system.with_ring(ring, modulus), self.values)

    def component(self, idx: int) -> "Cochain":
        sys = CoefficientSystem(self.system.ring, "scalar", 1, self.system.modulus)
        return Cochain(self.nerve, self.degree, sys, {s: (v[idx],) for s, v in self.values.items()})

    @classmethod
    def stack(cls, components: Sequence["Cochain"], shape: str, n: int) -> "Cochain":
        """Assemble a vector/upper cochain from scalar components."""
        first = components[0]
        sys = CoefficientSystem(first.system.ring, shape, n, first.system.modulus)
        if len(components) != sys.width:
            raise ValueError("wrong number of components")
        vals = {}
        keys = set()
        for c in components:
            keys.update(c.values)
        for s in keys:
            vals[s] = tuple(c.value(s)[0] for c in components)
        return cls(first.nerve, first.degree, sys, vals)


def cech_differential(c: Cochain) -> Cochain:
    """(∂c)_{λ0..λ_{k+1}} = Σ_i (-1)^i c_{λ0..λ̂_i..λ_{k+1}}."""
    k = c.degree
    w = c.system.width
    out = {}
    if not c.values:
        return Cochain(c.nerve, k + 1, c.system)
    for s in c.nerve.simplices(k + 1):
        acc = [0] * w
        hit = False
        for i in range(k + 2):
            v = c.values.get(s[:i] + s[i + 1:])
            if v is not None:
                hit = True
                if i % 2:
                    for t in range(w):
                        acc[t] -= v[t]
                else:
                    for t in range(w):
                        acc[t] += v[t]
        if hit:
            out[s] = tuple(acc)
    return Cochain(c.nerve, k + 1, c.system, out)


def _space_dim(nerve: Nerve, k: int, width: int) -> int:
    return nerve.count(k) * width if k >= 0 else 0


def linear_map_matrix(fn, nerve: Nerve, k: int, system: CoefficientSystem, out_dim: int) -> IntMatrix:
    """Integer matrix of a cochain-level linear map, column by basis cochain."""
    w = system.width
    cols = []
    for s in nerve.simplices(k) if k >= 0 else []:
        for t in range(w):
            v = [0] * w
            v[t] = 1
            cols.append(fn(Cochain(nerve, k, system, {s: tuple(v)})).to_vector())
    return IntMatrix.from_columns(cols, out_dim)


def coboundary_matrix(nerve: Nerve, k: int, width: int = 1) -> IntMatrix:
    """Matrix of ∂: C^k -> C^{k+1} for coefficients of the given width."""
    rows = _space_dim(nerve, k + 1, width)
    cols = _space_dim(nerve, k, width)
    M = [[0] * cols for _ in range(rows)]
    if k + 1 >= 0:
        for r, s in enumerate(nerve.simplices(k + 1)):
            for i in range(k + 2):
                f = s[:i] + s[i + 1:]
                if k >= 0:
                    c = nerve.index(k, f)
                    for t in range(width):
                        M[r * width + t][c * width + t] += -1 if i % 2 else 1
    return IntMatrix(M, cols=cols)


def cech_cohomology(nerve: Nerve, system, k: int) -> FpAbelianGroup:
    """Ȟ^k of the nerve with constant coefficients over Z or Q.

    Over Q the result is the vector-space dimension (``free_rank``) with
    integral representatives of a basis.
    """
    system = _parse_system(system)
    if system.ring == "QmodZ":
        raise UnsupportedRingError(
            "Q/Z coefficients are not computed as groups; use gysin.bockstein_zigzag on mod-1 cocycles"
        )
    if k < 0:
        return FpAbelianGroup(0)
    w = system.width
    d_out = coboundary_matrix(nerve, k, w)
    d_in = coboundary_matrix(nerve, k - 1, w)
    g = homology_quotient(d_out, d_in)
    if system.ring == "Q":
        return rationalize(g)
    return g


def rationalize(g: FpAbelianGroup) -> FpAbelianGroup:
    """Drop torsion summands: the Q-dimension with free generators kept."""
    gens = g.generators[len(g.torsion):] if g.generators else ()
    return FpAbelianGroup(g.free_rank, (), gens)


def cup(a: Cochain, b: Cochain) -> Cochain:
    """Front-face/back-face product of scalar cochains over Z or Q.

    (a ∪ b)_{λ0..λ_{p+q}} = a_{λ0..λp} · b_{λp..λ_{p+q}}
    """
    if a.system.shape != "scalar" or b.system.shape != "scalar":
        raise ValueError("cup is defined for scalar cochains")
    p, q = a.degree, b.degree
    ring = "Q" if "Q" in (a.system.ring, b.system.ring) else "Z"
    out = {}
    if a.values and b.values:
        for s in a.nerve.simplices(p + q):
            x = a.values.get(s[:p + 1])
            if x is None:
                continue
            y = b.values.get(s[p:])
            if y is None:
                continue
            out[s] = (x[0] * y[0],)
    return Cochain(a.nerve, p + q, CoefficientSystem(ring), out)


# Global sign of cup1, calibrated by brute force so that C(F)_{ij} = F_i ∪_1 F_j
# and ∂C(F)_{ij} = F_i ∪ F_j - F_j ∪ F_i for cocycles; frozen in the tests.
CUP1_SIGN = 1


def cup1(a: Cochain, b: Cochain) -> Cochain:
    """Steenrod cup-1 product of scalar cochains, degree p + q - 1.

    (a ∪_1 b)_{0..n} = ε Σ_{i=0}^{q-1} (-1)^{(q-i)(p+1)} a_{i..i+p} · b_{0..i, i+p..n}

    with ``n = p + q - 1`` and ε = ``CUP1_SIGN``.  On 2-cochains this reads
    ``(a ∪_1 b)(0123) = a(012) b(023) - a(123) b(013)``.
    """
    if a.system.shape != "scalar" or b.system.shape != "scalar":
        raise ValueError("cup1 is defined for scalar cochains")
    p, q = a.degree, b.degree
    n = p + q - 1
    ring = "Q" if "Q" in (a.system.ring, b.system.ring) else "Z"
    out = {}
    if n >= 0 and a.values and b.values:
        for s in a.nerve.simplices(n):
            acc = 0
            for i in range(q):
                x = a.values.get(s[i:i + p + 1])
                if x is None:
                    continue
                y = b.values.get(s[:i + 1] + s[i + p:])
                if y is None:
                    continue
                sign = -1 if ((q - i) * (p + 1)) % 2 else 1
                acc += sign * x[0] * y[0]
            if acc:
                out[s] = (CUP1_SIGN * acc,)
    return Cochain(a.nerve, max(n, 0), CoefficientSystem(ring), out)


# Fixtures ----------------------------------------------------------------

_TORUS7 = [tuple(sorted(((i) % 7, (i + 1) % 7, (i + 3) % 7))) for i in range(7)] + [
    tuple(sorted(((i) % 7, (i + 2) % 7, (i + 3) % 7))) for i in range(7)
]

_PROJECTIVE6 = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
    (1, 2, 4), (1, 3, 4), (1, 3, 5), (2, 3, 5), (2, 4, 5),
]

FIXTURE_NAMES = ("point", "simplex", "circle3", "torus7", "sphere_tetra", "projective6")


def fixture(name: str) -> Nerve:
    """Standard nerves: ``point``, ``simplex(k)``, ``circle3``, ``torus7``,
    ``sphere_tetra``, ``projective6``."""
    name = name.strip()
    if name == "point":
        return Nerve([(0,)])
    if name.startswith("simplex"):
        try:
            k = int(name[len("simplex"):].strip("()"))
        except ValueError:
            raise ValueError(f"bad simplex fixture {name!r}") from None
        return Nerve([tuple(range(k + 1))])
    if name == "circle3":
        return Nerve([(0, 1), (0, 2), (1, 2)])
    if name == "torus7":
        return Nerve(_TORUS7)
    if name == "sphere_tetra":
        return Nerve(list(combinations(range(4), 3)))
    if name == "projective6":
        return Nerve(_PROJECTIVE6)
    raise ValueError(f"unknown fixture {name!r}")


def top_generator(nerve: Nerve, k: int = 2) -> Optional[Cochain]:
    """A single-simplex k-cocycle generating Ȟ^k(Z) ≅ Z, when one exists.

    Each k-simplex indicator is tested in order; the first whose class is
    ±1 in SNF coordinates is returned, oriented so that it is +1.
    """
    g = cech_cohomology(nerve, Z, k)
    if g.free_rank != 1 or g.torsion:
        return None
    for s in nerve.simplices(k):
        c = Cochain(nerve, k, Z, {s: 1})
        if any(cech_differential(c).values):
            continue
        (coord,) = g.coordinates(c.to_vector())
        if abs(coord) == 1:
            return coord * c
    return None


def fixture_with_cocycle(name: str) -> tuple:
    """``(nerve, generator)``; the generator is None when H^2 is not ℤ."""
    nerve = fixture(name)
    gen = top_generator(nerve, 2) if name in ("torus7", "sphere_tetra") else None
    return nerve, gen


def is_cocycle(c: Cochain) -> bool:
    return cech_differential(c).is_zero()


def require_cocycle(c: Cochain, what: str = "cochain"):
    if not is_cocycle(c):
        raise PreconditionError(f"{what} is not a Čech cocycle")
