"""Seeded random nerves, cocycles and cochains for property sweeps."""

from __future__ import annotations

import random

from .dimred import DimRedCochain, TruncatedCochain
from .nerve import Cochain, CoefficientSystem, Nerve, cech_cohomology, cech_differential


def random_nerve(rng: random.Random, max_vertices: int = 20, max_dim: int = 5) -> Nerve:
    """Union of random simplices on at most ``max_vertices`` vertices."""
    v = rng.randint(max(3, max_dim + 1), max_vertices)
    count = rng.randint(2, max(2, v))
    maximal = []
    for _ in range(count):
        d = rng.randint(1, max_dim)
        maximal.append(tuple(sorted(rng.sample(range(v), d + 1))))
    used = sorted({x for s in maximal for x in s})
    relabel = {x: i for i, x in enumerate(used)}
    return Nerve([tuple(relabel[x] for x in s) for s in maximal])


def random_values(rng: random.Random, width: int, lo: int = -3, hi: int = 3) -> tuple:
    return tuple(rng.randint(lo, hi) for _ in range(width))


def random_cochain(nerve: Nerve, k: int, system: CoefficientSystem, rng: random.Random, density: float = 0.7) -> Cochain:
    if k < 0:
        raise ValueError("negative degree")
    vals = {s: random_values(rng, system.width) for s in nerve.simplices(k) if rng.random() < density}
    return Cochain(nerve, k, system, vals)


def random_cocycle_F(nerve: Nerve, n: int, rng: random.Random) -> Cochain:
    """∂(random integer 1-cochain) plus integer multiples of Ȟ²(ℤ) generators."""
    sysZ = CoefficientSystem("Z", "vector", n)
    F = cech_differential(random_cochain(nerve, 1, sysZ, rng))
    h2 = cech_cohomology(nerve, "Z", 2)
    comps = []
    for _ in range(n):
        total = [0] * nerve.count(2)
        for gen in h2.generators:
            c = rng.randint(-2, 2)
            total = [a + c * b for a, b in zip(total, gen)]
        comps.append(Cochain.from_vector(nerve, 2, "Z", total))
    if comps and nerve.count(2):
        F = F + Cochain.stack(comps, "vector", n)
    return F


def random_triple(nerve: Nerve, k: int, n: int, rng: random.Random) -> DimRedCochain:
    sysZ = lambda shape: CoefficientSystem("Z", shape, n)
    top = random_cochain(nerve, k, sysZ("scalar"), rng)
    mid = random_cochain(nerve, k - 1, sysZ("vector"), rng) if k >= 1 else None
    bot = random_cochain(nerve, k - 2, sysZ("upper"), rng) if k >= 2 else None
    return DimRedCochain(k, n, top, mid, bot)


def random_pair(nerve: Nerve, k: int, n: int, rng: random.Random) -> TruncatedCochain:
    mid = random_cochain(nerve, k, CoefficientSystem("Z", "vector", n), rng)
    bot = random_cochain(nerve, k - 1, CoefficientSystem("Z", "upper", n), rng) if k >= 1 else None
    return TruncatedCochain(k, n, mid, bot)
