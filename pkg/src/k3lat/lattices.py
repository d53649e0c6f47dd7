"""Lattices given by integral Gram matrices, and the standard even unimodular ones.

The K3 lattice uses the summand order ``U, U, U, E8(-1), E8(-1)``.  In
coordinates the three hyperbolic planes are ``(e1, e2) = (0, 1)``,
``(f1, f2) = (2, 3)`` and ``(g1, g2) = (4, 5)``, followed by the two E8
blocks at ``6..13`` and ``14..21``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactlinalg import Matrix, dot

E1, E2, F1, F2, G1, G2 = range(6)

# Cartan matrix of E8: simple roots 1..8 with edges 1-3, 3-4, 4-5, 5-6, 6-7,
# 7-8 and the branch 2-4 (Bourbaki labelling).
_E8_EDGES = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)]


def _e8_gram() -> list[list[int]]:
    g = [[2 if i == j else 0 for j in range(8)] for i in range(8)]
    for i, j in _E8_EDGES:
        g[i][j] = g[j][i] = -1
    return g


@dataclass(frozen=True)
class Lattice:
    """A nondegenerate integral lattice ``(Z^rank, gram)``."""

    gram: Matrix
    label: str | None = None

    def __post_init__(self):
        g = self.gram
        if not isinstance(g, Matrix):
            object.__setattr__(self, "gram", g := Matrix(g))
        if not g.is_square() or not g.is_integral():
            raise ValueError("Gram matrix must be square and integral")
        if g.T != g:
            raise ValueError("Gram matrix must be symmetric")
        if g.det() == 0:
            raise ValueError("Gram matrix is degenerate")

    @property
    def rank(self) -> int:
        return self.gram.nrows

    @property
    def det(self) -> int:
        return self.gram.det()

    def is_even(self) -> bool:
        return all(self.gram[i, i] % 2 == 0 for i in range(self.rank))

    def is_unimodular(self) -> bool:
        return abs(self.det) == 1

    def inner(self, v: Sequence, w: Sequence):
        """The bilinear form ``v^T G w`` (exact for rational inputs)."""
        return dot(v, self.gram @ tuple(w))

    def norm(self, v: Sequence):
        return self.inner(v, v)

    def basis_vector(self, i: int) -> tuple[int, ...]:
        return tuple(int(j == i) for j in range(self.rank))

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def rescale(self, t: int) -> "Lattice":
        name = f"{self.label}({t})" if self.label else None
        return Lattice(self.gram * t, name)

    def check_vector(self, v: Sequence) -> tuple:
        v = tuple(v)
        if len(v) != self.rank:
            raise ValueError(f"vector of length {len(v)} in a rank {self.rank} lattice")
        return v


def direct_sum(*lattices: Lattice) -> Lattice:
    labels = [L.label or "?" for L in lattices]
    return Lattice(Matrix.block_diagonal(*(L.gram for L in lattices)), "+".join(labels) or None)


def hyperbolic_plane() -> Lattice:
    return Lattice(Matrix([[0, 1], [1, 0]]), "U")


def e8(sign: int = 1) -> Lattice:
    L = Lattice(Matrix(_e8_gram()), "E8")
    return L if sign == 1 else Lattice(L.gram * -1, "E8(-1)")


@functools.lru_cache(maxsize=None)
def standard_lattice(name: str) -> Lattice:
    """One of ``U``, ``E8``, ``E8_minus``, ``K3`` or ``Mukai``.

    ``K3`` is ``U^3 + E8(-1)^2`` and ``Mukai`` is ``U^4 + E8(-1)^2``.
    """
    U = hyperbolic_plane()
    if name == "U":
        return U
    if name == "E8":
        return e8()
    if name == "E8_minus":
        return e8(-1)
    if name == "K3":
        return Lattice(direct_sum(U, U, U, e8(-1), e8(-1)).gram, "K3")
    if name == "Mukai":
        return Lattice(direct_sum(U, U, U, U, e8(-1), e8(-1)).gram, "Mukai")
    raise ValueError(f"unknown lattice {name!r}")


def k3_lattice() -> Lattice:
    return standard_lattice("K3")


def signature(L: Lattice) -> tuple[int, int]:
    """Signature by symmetric Gaussian elimination over the rationals."""
    n = L.rank
    a = [[Fraction(x) for x in r] for r in L.gram.rows()]
    pos = neg = 0
    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[k], a[j] = a[j], a[k]
                for r in a:
                    r[k], r[j] = r[j], r[k]
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is None:
                    raise ValueError("degenerate Gram matrix")
                # a[j][j] == 0 here, so adding row/col j to k gives 2 a[k][j] != 0
                a[k] = [x + y for x, y in zip(a[k], a[j])]
                for r in a:
                    r[k] += r[j]
        p = a[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        # row reduction alone leaves the trailing block equal to the
        # (symmetric) Schur complement, which is all later steps read
        for i in range(k + 1, n):
            if a[i][k]:
                c = a[i][k] / p
                a[i] = [x - c * y for x, y in zip(a[i], a[k])]
    return pos, neg


def is_primitive(L: Lattice, v: Sequence[int]) -> bool:
    v = L.check_vector(v)
    if not any(v):
        raise ValueError("the zero vector has no primitivity")
    return math.gcd(*v) == 1


def divisibility(L: Lattice, y: Sequence[int]) -> int:
    """The positive generator of ``{(y, l) : l in L}``."""
    y = L.check_vector(y)
    if not any(y):
        raise ValueError("zero vector")
    return math.gcd(*(L.gram @ y))


def u_vector_of_square(d: int) -> tuple[int, int]:
    """``e1 + d e2`` in ``U``; it is primitive with square ``2d``."""
    return (1, d)


def embed(v: Sequence, offset: int, rank: int = 22) -> tuple:
    """Place a short vector into coordinates ``offset, offset+1, ...``."""
    out = [0] * rank
    out[offset:offset + len(v)] = v
    return tuple(out)
