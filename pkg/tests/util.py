"""Shared random generators for the test suite (seeded, reproducible)."""

from __future__ import annotations

import random
from fractions import Fraction

from gitstab.config import WeightedConfiguration, configuration
from gitstab.linalg import RationalMatrix, Subspace, canonicalize, span


def rand_vector(rng: random.Random, n: int, lo: int = -9, hi: int = 9):
    return [Fraction(rng.randint(lo, hi)) for _ in range(n)]


def rand_subspace(rng: random.Random, n: int, dim: int) -> Subspace:
    if dim == 0:
        return span([], n)
    while True:
        sub = span([rand_vector(rng, n) for _ in range(dim)], n)
        if sub.dim == dim:
            return sub


def rand_invertible(rng: random.Random, n: int) -> RationalMatrix:
    while True:
        m = RationalMatrix.from_rows(
            [rand_vector(rng, n) for _ in range(n)]
        )
        if m.det() != 0:
            return m


def rand_config(
    rng: random.Random,
    n_max: int = 4,
    m_max: int = 4,
    proper: bool = True,
) -> WeightedConfiguration:
    n = rng.randint(2, n_max)
    m = rng.randint(1, m_max)
    items = []
    for _ in range(m):
        dim = rng.randint(1, n - 1 if proper else n)
        items.append((rand_subspace(rng, n, dim), Fraction(rng.randint(1, 9))))
    return configuration(n, 1, items)


def transform_subspace(g: RationalMatrix, sub: Subspace) -> Subspace:
    if sub.dim == 0:
        return sub
    return canonicalize(g @ sub.basis)


def pairwise_transverse_planes(rng: random.Random, m: int):
    """m planes in Q^4, every pair meeting only at the origin."""
    from gitstab.linalg import meet

    planes: list[Subspace] = []
    while len(planes) < m:
        cand = rand_subspace(rng, 4, 2)
        if all(meet(cand, p).dim == 0 for p in planes):
            planes.append(cand)
    return planes
