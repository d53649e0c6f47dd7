"""Random generators shared by the test modules (explicit RNG, no global state)."""

import math
import random

from k3lat.exactlinalg import Matrix
from k3lat.isometry import RationalIsometry, compose_reflections, eichler_transvection, reflection
from k3lat.lattices import Lattice


def random_anisotropic(L: Lattice, rng: random.Random, support: int = 4, bound: int = 3) -> tuple:
    """A primitive vector of nonzero square supported on a few coordinates."""
    while True:
        v = [0] * L.rank
        for k in rng.sample(range(L.rank), min(support, L.rank)):
            v[k] = rng.randint(-bound, bound)
        if any(v) and math.gcd(*v) == 1 and L.norm(v) != 0:
            return tuple(v)


def random_rational_isometry(L: Lattice, rng: random.Random, reflections: int = 3) -> RationalIsometry:
    """Product of reflections in random anisotropic vectors."""
    return compose_reflections(L, [random_anisotropic(L, rng) for _ in range(reflections)])


def random_transvection(L: Lattice, rng: random.Random) -> RationalIsometry:
    """``E(e, w)`` for ``e`` the first basis vector of a leading ``U`` and random ``w`` orthogonal to it."""
    f = tuple(int(i == 0) for i in range(L.rank))
    w = [rng.randint(-2, 2) if i >= 2 else 0 for i in range(L.rank)]
    w[0] = rng.randint(-2, 2)
    return eichler_transvection(L, f, w)


def cyclic_reflection(L: Lattice, d: int, offset: int = 0) -> RationalIsometry:
    """``r_x`` for ``x = e + d e'`` in the hyperbolic plane at ``offset``; of ``|d|``-cyclic type."""
    x = [0] * L.rank
    x[offset], x[offset + 1] = 1, d
    return reflection(L, x)


def identity(L: Lattice) -> RationalIsometry:
    return RationalIsometry(L, Matrix.identity(L.rank))
