"""Dimensionally reduced de Rham complex over finite invariant-form models.

Degree-k elements are tuples of components H_{(k-i) i} ∈ Ω^{k-i} ⊗ Λ^i(ℚⁿ)*
for i in a truncation window [m_lo, l_hi].  The differential is

    (D H)_i = d H_i + (-1)^{k-i-1} H_{i+1} ∧ F₂

where H ∧ F₂ contracts one fiber index against the curvature with
omission sign (-1)^{l+1}.  All arithmetic is exact over ℚ.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional, Sequence

from .abelian import mat_vec, rational_nullspace, rational_rank, rational_solve


class ModelError(ValueError):
    """The finite model violates d² = 0 or operator compatibility."""


def monomials(m: int, j: int) -> list:
    return list(combinations(range(m), j)) if 0 <= j <= m else []


def _merge(a: tuple, b: tuple):
    """dz_a ∧ dz_b as (sign, sorted monomial), or (0, None) on overlap."""
    if set(a) & set(b):
        return 0, None
    inversions = sum(1 for x in a for y in b if x > y)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


def _zero(rows: int, cols: int) -> list:
    return [[Fraction(0)] * cols for _ in range(rows)]


def _matmul(A: list, B: list, inner: int) -> list:
    if not A:
        return []
    cols = len(B[0]) if B else 0
    return [[sum((A[i][t] * B[t][j] for t in range(inner)), Fraction(0)) for j in range(cols)] for i in range(len(A))]


@dataclass(frozen=True)
class CurvatureMatrix:
    """n × C(m,2) rationals: coefficient of dz_p∧dz_q (p<q, lex) in F₂^{(a)}."""

    m: int
    n: int
    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(Fraction(x) for x in r) for r in self.entries)
        if len(rows) != self.n or any(len(r) != comb(self.m, 2) for r in rows):
            raise ValueError(f"curvature must be {self.n} × {comb(self.m, 2)}")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def zero(cls, m: int, n: int) -> "CurvatureMatrix":
        return cls(m, n, tuple((0,) * comb(m, 2) for _ in range(n)))

    def scaled(self, c) -> "CurvatureMatrix":
        return CurvatureMatrix(self.m, self.n, tuple(tuple(c * x for x in r) for r in self.entries))

    def form(self, a: int) -> dict:
        """F₂^{(a)} as {(p, q): coefficient}."""
        return {pq: x for pq, x in zip(monomials(self.m, 2), self.entries[a]) if x}

    def to_json(self) -> list:
        return [[str(x) for x in r] for r in self.entries]


def _wedge_form_matrix(m: int, j: int, form: dict) -> list:
    """Matrix of α ↦ α ∧ form from Λ^j to Λ^{j+deg}."""
    src = monomials(m, j)
    deg = len(next(iter(form))) if form else 2
    tgt = monomials(m, j + deg)
    idx = {t: r for r, t in enumerate(tgt)}
    M = _zero(len(tgt), len(src))
    for c, a in enumerate(src):
        for b, x in form.items():
            sgn, mono = _merge(a, b)
            if sgn:
                M[idx[mono]][c] += sgn * x
    return M


@dataclass(frozen=True, eq=False)
class InvariantModel:
    """Finite model of invariant forms on the base.

    ``d[j]`` maps Λ^j → Λ^{j+1} and ``mu[a][j]`` maps Λ^j → Λ^{j+2}
    (wedge with F₂^{(a)}); missing entries mean zero.
    """

    m: int
    n: int
    d: dict = field(default_factory=dict)
    mu: tuple = ()
    is_torus: bool = False
    curvature: Optional[CurvatureMatrix] = None

    def __post_init__(self):
        if len(self.mu) != self.n:
            raise ModelError("need one mu operator per fiber direction")
        self.validate()

    def dim(self, j: int) -> int:
        return comb(self.m, j) if 0 <= j <= self.m else 0

    def d_matrix(self, j: int) -> list:
        M = self.d.get(j)
        return M if M is not None else _zero(self.dim(j + 1), self.dim(j))

    def mu_matrix(self, a: int, j: int) -> list:
        M = self.mu[a].get(j)
        return M if M is not None else _zero(self.dim(j + 2), self.dim(j))

    def validate(self):
        for j in range(self.m + 1):
            if any(any(x for x in r) for r in _matmul(self.d_matrix(j + 1), self.d_matrix(j), self.dim(j + 1))):
                raise ModelError(f"d² != 0 on Λ^{j}")
            for a in range(self.n):
                left = _matmul(self.d_matrix(j + 2), self.mu_matrix(a, j), self.dim(j + 2))
                right = _matmul(self.mu_matrix(a, j + 1), self.d_matrix(j), self.dim(j + 1))
                if left != right:
                    raise ModelError(f"d∘mu[{a}] != mu[{a}]∘d on Λ^{j}")
                for b in range(a + 1, self.n):
                    ab = _matmul(self.mu_matrix(a, j + 2), self.mu_matrix(b, j), self.dim(j + 2))
                    ba = _matmul(self.mu_matrix(b, j + 2), self.mu_matrix(a, j), self.dim(j + 2))
                    if ab != ba:
                        raise ModelError(f"mu[{a}] and mu[{b}] do not commute on Λ^{j}")

    @classmethod
    def torus(cls, F2: CurvatureMatrix) -> "InvariantModel":
        """Constant forms on T^m: d = 0, mu = wedge with the constant 2-forms."""
        mu = tuple({j: _wedge_form_matrix(F2.m, j, F2.form(a)) for j in range(F2.m - 1)} for a in range(F2.n))
        return cls(F2.m, F2.n, {}, mu, True, F2)


def _fiber_contract(J: tuple):
    """Yield (sign, a, J without a) for the omission formula."""
    for pos, a in enumerate(J):
        yield (1 if pos % 2 == 0 else -1), a, J[:pos] + J[pos + 1:]


class BhmComplex:
    """The truncated complex ⊕_{i=m_lo}^{l_hi} Ω^{k-i} ⊗ Λ^i over a model."""

    def __init__(self, model: InvariantModel, m_lo: int = 0, l_hi: Optional[int] = None):
        if l_hi is None:
            l_hi = model.n
        if m_lo < 0 or l_hi < m_lo:
            raise ValueError(f"bad truncation range ({m_lo}, {l_hi})")
        self.model, self.m_lo, self.l_hi = model, m_lo, l_hi

    def blocks(self, k: int) -> list:
        """[(i, fiber monomials, form degree, offset)] in layout order (fiber outer, form inner)."""
        out, off = [], 0
        for i in range(self.m_lo, min(self.l_hi, self.model.n) + 1):
            p = k - i
            if not 0 <= p <= self.model.m:
                continue
            fib = monomials(self.model.n, i)
            out.append((i, fib, p, off))
            off += len(fib) * self.model.dim(p)
        return out

    def dim(self, k: int) -> int:
        return sum(len(f) * self.model.dim(p) for _, f, p, _ in self.blocks(k))

    def _pos(self, k: int) -> dict:
        pos = {}
        for i, fib, p, off in self.blocks(k):
            w = self.model.dim(p)
            for t, J in enumerate(fib):
                pos[J] = (off + t * w, p)
        return pos

    def matrix(self, k: int) -> list:
        """Rows × columns of D from degree k to k+1."""
        rows, cols = self.dim(k + 1), self.dim(k)
        M = _zero(rows, cols)
        if not rows or not cols:
            return M
        tgt = self._pos(k + 1)
        for i, fib, p, off in self.blocks(k):
            w = self.model.dim(p)
            dM = self.model.d_matrix(p)
            for t, J in enumerate(fib):
                src = off + t * w
                if J in tgt:  # d H_i stays in column i
                    base = tgt[J][0]
                    for r in range(self.model.dim(p + 1)):
                        for c in range(w):
                            if dM[r][c]:
                                M[base + r][src + c] += dM[r][c]
                # H_i ∧ F₂ lands in column i-1 with sign (-1)^{(k+1)-(i-1)-1} = (-1)^{k-i+1}
                outer = -1 if (k - i + 1) % 2 else 1
                for sgn, a, Jr in _fiber_contract(J):
                    if Jr not in tgt:
                        continue
                    base = tgt[Jr][0]
                    mu = self.model.mu_matrix(a, p)
                    for r in range(self.model.dim(p + 2)):
                        for c in range(w):
                            if mu[r][c]:
                                M[base + r][src + c] += outer * sgn * mu[r][c]
        return M

    def apply(self, k: int, vec: Sequence) -> list:
        return mat_vec(self.matrix(k), vec) if self.dim(k + 1) else []


@dataclass
class BhmElement:
    """Degree-k element stored per fiber monomial J as a vector in Λ^{k-|J|}."""

    k: int
    components: dict  # J -> list of Fractions over monomials(m, k-|J|)

    def to_vector(self, cx: BhmComplex) -> list:
        out = [Fraction(0)] * cx.dim(self.k)
        for J, (off, p) in cx._pos(self.k).items():
            v = self.components.get(J)
            if v is not None:
                out[off:off + len(v)] = [Fraction(x) for x in v]
        return out

    @classmethod
    def from_vector(cls, cx: BhmComplex, k: int, vec: Sequence) -> "BhmElement":
        comps = {}
        for J, (off, p) in cx._pos(k).items():
            seg = list(vec[off:off + cx.model.dim(p)])
            if any(seg):
                comps[J] = seg
        return cls(k, comps)


def wedge_f2(H: BhmElement, model: InvariantModel, i: int) -> BhmElement:
    """Contract the i-th fiber column of H with F₂; result lives in column i-1 at degree k+1."""
    if i < 1:
        raise ValueError("wedge_f2 needs fiber degree i >= 1")
    p = H.k - i
    out = {}
    for J, v in H.components.items():
        if len(J) != i:
            continue
        for sgn, a, Jr in _fiber_contract(J):
            w = mat_vec(model.mu_matrix(a, p), v)
            acc = out.setdefault(Jr, [Fraction(0)] * model.dim(p + 2))
            for t, x in enumerate(w):
                acc[t] += sgn * x
    return BhmElement(H.k + 1, {J: v for J, v in out.items() if any(v)})


def d_F2(H: BhmElement, model: InvariantModel, m_lo: int = 0, l_hi: Optional[int] = None) -> BhmElement:
    cx = BhmComplex(model, m_lo, l_hi)
    return BhmElement.from_vector(cx, H.k + 1, cx.apply(H.k, H.to_vector(cx)))


@dataclass
class BhmCohomology:
    k: int
    dimension: int
    basis: list  # vectors in the layout of BhmComplex.blocks(k)


def _rank(M: list) -> int:
    return rational_rank(M) if M and M[0] else 0


def _columns(M: list, ncols: int) -> list:
    return [[M[r][c] for r in range(len(M))] for c in range(ncols)]


def bhm_cohomology(model: InvariantModel, k: int, m_lo: int = 0, l_hi: Optional[int] = None) -> BhmCohomology:
    """Dimension and representative basis of H^{k,(m_lo,l_hi)}."""
    cx = BhmComplex(model, m_lo, l_hi)
    if k < 0:
        return BhmCohomology(k, 0, [])
    n_k = cx.dim(k)
    D_out = cx.matrix(k)
    Z = rational_nullspace(D_out, n_k) if cx.dim(k + 1) else [[Fraction(int(i == j)) for i in range(n_k)] for j in range(n_k)]
    B = _columns(cx.matrix(k - 1), cx.dim(k - 1)) if k >= 1 and cx.dim(k - 1) else []
    B = [b for b in B if any(b)]
    rank_b = _rank(B)
    basis, span = [], list(B)
    r = rank_b
    for z in Z:
        if _rank(span + [z]) > r:
            span.append(z)
            r += 1
            basis.append(z)
    return BhmCohomology(k, len(Z) - rank_b, basis)


# ---------------------------------------------------------------- Gysin sequence over ℚ


def _in_span(cols: list, v: list) -> Optional[list]:
    if not any(v):
        return [Fraction(0)] * len(cols)
    if not cols:
        return None
    rows = [[c[r] for c in cols] for r in range(len(v))]
    return rational_solve(rows, v, len(cols))


def _cocycles(D: list, n: int, has_target: bool) -> list:
    if n == 0:
        return []
    if not has_target:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    return rational_nullspace(D, n)


@dataclass
class RationalNode:
    name: str
    degree: int
    composite_zero: bool
    kernel_in_image: bool
    rank_identity: bool
    failure: Optional[str] = None

    @property
    def exact(self) -> bool:
        return self.composite_zero and self.kernel_in_image and self.rank_identity

    def summary(self) -> dict:
        return {"node": self.name, "degree": self.degree, "exact": self.exact,
                "composite_zero": self.composite_zero, "kernel_in_image": self.kernel_in_image,
                "rank_identity": self.rank_identity, "failure": self.failure}


def _rational_node(name, degree, f, g, A, B, C) -> RationalNode:
    """Exactness at H(B) of H(A) --f--> H(B) --g--> H(C); A, B, C are (complex, degree) pairs.

    ``f`` and ``g`` are functions on coordinate vectors.
    """
    (cA, kA), (cB, kB), (cC, kC) = A, B, C
    ZA = _cocycles(cA.matrix(kA), cA.dim(kA), cA.dim(kA + 1) > 0)
    ZB = _cocycles(cB.matrix(kB), cB.dim(kB), cB.dim(kB + 1) > 0)
    imB = [c for c in _columns(cB.matrix(kB - 1), cB.dim(kB - 1)) if any(c)] if cB.dim(kB - 1) else []
    imC = [c for c in _columns(cC.matrix(kC - 1), cC.dim(kC - 1)) if any(c)] if cC.dim(kC - 1) else []
    fail = None
    comp = True
    for a in ZA:
        if _in_span(imC, g(f(a))) is None:
            comp, fail = False, "g∘f is not zero in cohomology"
            break
    # L = {z ∈ Z_B : g z ∈ im D_C}
    L = []
    if ZB:
        gz = [g(z) for z in ZB]
        rows = [[gz[c][r] for c in range(len(ZB))] + [-x[r] for x in imC] for r in range(cC.dim(kC))]
        width = len(ZB) + len(imC)
        sols = rational_nullspace(rows, width) if rows else [[Fraction(int(i == j)) for i in range(width)] for j in range(len(ZB))]
        for y in sols:
            coeff = y[:len(ZB)]
            if any(coeff):
                L.append([sum((c * z[t] for c, z in zip(coeff, ZB)), Fraction(0)) for t in range(cB.dim(kB))])
    image_cols = [f(a) for a in ZA] + imB
    kin = True
    for z in L:
        if _in_span(image_cols, z) is None:
            kin, fail = False, fail or "kernel element outside image"
            break
    # dim ker(g on H) = dim im(f on H), all as subspaces of Z_B modulo im D_B
    rB = _rank(imB)
    dim_ker = _rank(L + imB) - rB if L else 0
    dim_im = _rank([f(a) for a in ZA] + imB) - rB if ZA else 0
    rank_ok = dim_ker == dim_im
    if not rank_ok:
        fail = fail or f"rank mismatch {dim_ker} != {dim_im}"
    return RationalNode(name, degree, comp, kin, rank_ok, fail)


def bhm_gysin_check(model: InvariantModel, k_range=range(0, 5), m: int = 0, l: Optional[int] = None) -> list:
    """Exactness of H^{k,(m,m)} → H^{k,(m,l)} → H^{k,(m+1,l)} → H^{k+1,(m,m)}.

    The connecting map is H_{m+1} ↦ (-1)^{k-m} H_{m+1} ∧ F₂.
    """
    if l is None:
        l = model.n
    if not 0 <= m < l:
        raise ValueError("need 0 <= m < l")
    low, full, high = BhmComplex(model, m, m), BhmComplex(model, m, l), BhmComplex(model, m + 1, l)

    def include(k):
        def f(v):
            out = [Fraction(0)] * full.dim(k)
            src, tgt = low._pos(k), full._pos(k)
            for J, (off, p) in src.items():
                t = tgt[J][0]
                w = model.dim(p)
                out[t:t + w] = v[off:off + w]
            return out
        return f

    def project(k):
        def g(v):
            out = [Fraction(0)] * high.dim(k)
            src, tgt = full._pos(k), high._pos(k)
            for J, (off, p) in tgt.items():
                s = src[J][0]
                w = model.dim(p)
                out[off:off + w] = v[s:s + w]
            return out
        return g

    def connect(k):
        sign = -1 if (k - m) % 2 else 1

        def h(v):
            H = BhmElement.from_vector(high, k, v)
            W = wedge_f2(H, model, m + 1)
            vec = W.to_vector(low)
            return [sign * x for x in vec]
        return h

    out = []
    for k in k_range:
        out.append(_rational_node("low", k, connect(k - 1), include(k),
                                  (high, k - 1), (low, k), (full, k)))
        out.append(_rational_node("full", k, include(k), project(k),
                                  (low, k), (full, k), (high, k)))
        out.append(_rational_node("high", k, project(k), connect(k),
                                  (full, k), (high, k), (low, k + 1)))
    return out


# ---------------------------------------------------------------- Chevalley–Eilenberg oracle


def _ce_d_generator(m: int, F2: CurvatureMatrix, g: int) -> dict:
    """d of generator g (0..m-1 are z's, m.. are ξ's), as {sorted tuple: coeff}."""
    if g < m:
        return {}
    return {pq: -x for pq, x in F2.form(g - m).items()}


def _perm_sign(seq: list) -> int:
    s = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


def ce_total_space(model: InvariantModel, k: int) -> int:
    """dim H^k of the Lie algebra with dz = 0, dξ_a = -F₂^{(a)}."""
    if not model.is_torus or model.curvature is None:
        raise ModelError("the CE oracle needs a torus base model")
    F2 = model.curvature
    m, n = model.m, model.n
    N = m + n

    def basis(j):
        return list(combinations(range(N), j)) if 0 <= j <= N else []

    def dmat(j):
        src, tgt = basis(j), basis(j + 1)
        idx = {t: r for r, t in enumerate(tgt)}
        M = _zero(len(tgt), len(src))
        for c, mono in enumerate(src):
            # Leibniz: d(x1…xj) = Σ (-1)^pos x1…d(x_pos)…xj
            for pos, gen in enumerate(mono):
                for pq, x in _ce_d_generator(m, F2, gen).items():
                    rest = list(mono[:pos]) + list(pq) + list(mono[pos + 1:])
                    if len(set(rest)) < len(rest):
                        continue
                    sign = (-1) ** pos * _perm_sign(rest)
                    M[idx[tuple(sorted(rest))]][c] += sign * x
        return M

    dk, dk1 = dmat(k), dmat(k - 1)
    nk = len(basis(k))
    rank_out = _rank(dk) if dk else 0
    rank_in = _rank(dk1) if dk1 and k >= 1 else 0
    return nk - rank_out - rank_in


# ---------------------------------------------------------------- T-dual pushforward


def tdual_pushforward(H: BhmElement, model: InvariantModel) -> BhmElement:
    """Drop the i = 0 component of a closed degree-k element of the full complex."""
    full = BhmComplex(model, 0, model.n)
    if any(full.apply(H.k, H.to_vector(full))):
        raise ValueError("input is not D-closed")
    return BhmElement(H.k, {J: v for J, v in H.components.items() if len(J) >= 1})
