"""Rational isometries of lattices and the integral tools used to move them around."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .exactlinalg import (
    Matrix,
    dot,
    gcd_coefficients,
    hermite_normal_form,
    intersect_column_lattices,
    smith_divisors,
)
from .lattices import E1, E2, F1, F2, G1, G2, Lattice, is_primitive, k3_lattice


class InvariantError(AssertionError):
    """An internal postcondition failed; this is a bug, not bad input."""


def check(condition: bool, message: str):
    if not condition:
        raise InvariantError(message)


@lru_cache(maxsize=32)
def _gram_inverse(gram: Matrix) -> Matrix:
    return gram.inverse()


@dataclass(frozen=True)
class RationalIsometry:
    """An element of ``O(L_Q)`` acting on column vectors by ``v -> M v``."""

    lattice: Lattice
    matrix: Matrix

    def __post_init__(self):
        M, G = self.matrix, self.lattice.gram
        if not isinstance(M, Matrix):
            object.__setattr__(self, "matrix", M := Matrix(M))
        if M.shape != G.shape:
            raise ValueError(f"matrix shape {M.shape} does not match lattice rank {G.nrows}")
        if M.T @ G @ M != G:
            raise ValueError("matrix does not preserve the Gram form")

    @classmethod
    def identity(cls, lattice: Lattice) -> "RationalIsometry":
        return cls(lattice, Matrix.identity(lattice.rank))

    def __call__(self, v: Sequence) -> tuple:
        return self.matrix @ tuple(v)

    def __matmul__(self, other: "RationalIsometry") -> "RationalIsometry":
        """Composition ``self o other``."""
        if not isinstance(other, RationalIsometry):
            return NotImplemented
        if other.lattice.gram != self.lattice.gram:
            raise ValueError("isometries of different lattices")
        return RationalIsometry(self.lattice, self.matrix @ other.matrix)

    def inverse(self) -> "RationalIsometry":
        G = self.lattice.gram
        return RationalIsometry(self.lattice, _gram_inverse(G) @ self.matrix.T @ G)

    def is_integral(self) -> bool:
        return self.matrix.is_integral()

    def det(self) -> int:
        return self.matrix.det()


@dataclass(frozen=True)
class QuotientStructure:
    """Invariant factors ``d_1 | d_2 | ... | d_r`` of a finite quotient ``L / I``.

    The list has one entry per coordinate, so trailing entries carry the
    structure and leading entries are 1.
    """

    elementary_divisors: tuple[int, ...]

    def __post_init__(self):
        d = self.elementary_divisors
        if any(x <= 0 for x in d):
            raise ValueError("quotient must be finite")
        if any(b % a for a, b in zip(d, d[1:])):
            raise ValueError("not a divisor chain")

    @property
    def index(self) -> int:
        return math.prod(self.elementary_divisors)

    @property
    def nontrivial(self) -> tuple[int, ...]:
        return tuple(d for d in self.elementary_divisors if d > 1)

    def is_cyclic(self) -> bool:
        return len(self.nontrivial) <= 1

    @property
    def cyclic_order(self) -> int | None:
        return self.index if self.is_cyclic() else None


def reflection(L: Lattice, x: Sequence[int]) -> RationalIsometry:
    """The reflection ``v -> v - 2 (v,x)/(x,x) x`` in a primitive anisotropic ``x``."""
    x = L.check_vector(x)
    if not is_primitive(L, x):
        raise ValueError("reflection vector must be primitive")
    q = L.norm(x)
    if q == 0:
        raise ValueError("reflection vector must be anisotropic")
    return RationalIsometry(L, _reflection_matrix(L.gram, x, q))


def _reflection_matrix(G: Matrix, x: Sequence, q) -> Matrix:
    Gx = G @ tuple(x)
    n = len(x)
    outer = Matrix([[xi * gj for gj in Gx] for xi in x], ncols=n)
    return Matrix.identity(n) - outer * Fraction(2) / q


def coinvariant_sublattice(phi: RationalIsometry) -> Matrix:
    """Basis of ``I_phi = L cap phi^{-1}(L)`` in Hermite normal form."""
    n = phi.lattice.rank
    inv = phi.inverse().matrix
    d = inv.den
    if d == 1:
        return Matrix.identity(n)
    scaled = intersect_column_lattices(Matrix.identity(n) * d, inv * d)
    basis = scaled / d
    check(basis.is_integral(), "I_phi must sit inside L")
    return basis


def quotient_structure(phi: RationalIsometry) -> QuotientStructure:
    """Structure of ``L / I_phi`` read off from a Smith form of the basis of ``I_phi``."""
    divs = smith_divisors(coinvariant_sublattice(phi))
    return QuotientStructure(divs)


def cyclic_type(phi: RationalIsometry) -> int | None:
    """``n`` if ``L / I_phi`` is cyclic of order ``n``; ``None`` if it is not cyclic.

    Integral isometries have type 1.
    """
    return quotient_structure(phi).cyclic_order


# -- reflections and Cartan-Dieudonne ---------------------------------------


def _primitive(v: Sequence) -> tuple[int, ...]:
    """Integral primitive multiple of a rational vector, first nonzero entry positive."""
    fr = [Fraction(x) for x in v]
    den = math.lcm(1, *(x.denominator for x in fr))
    ints = [int(x * den) for x in fr]
    g = math.gcd(*ints)
    if g == 0:
        raise ValueError("zero vector")
    sign = 1 if next(x for x in ints if x) > 0 else -1
    return tuple(sign * x // g for x in ints)


def orthogonal_basis(G: Matrix) -> list[tuple[int, ...]]:
    """Pairwise orthogonal anisotropic integral vectors spanning ``Q^n``.

    Isotropic leftovers are paired off: if ``q(a) = q(b) = 0`` and
    ``(a, b) != 0`` then ``a + b`` is anisotropic.
    """
    n = G.nrows
    form = lambda u, v: dot(u, G @ tuple(v))
    pool = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    out = []
    while pool:
        idx = next((i for i, v in enumerate(pool) if form(v, v) != 0), None)
        if idx is None:
            pair = next(((i, j) for i in range(len(pool)) for j in range(i + 1, len(pool))
                         if form(pool[i], pool[j]) != 0), None)
            if pair is None:
                raise ValueError("degenerate form")
            i, j = pair
            pool[i] = tuple(a + b for a, b in zip(pool[i], pool[j]))
            idx = i
        w = pool.pop(idx)
        qw = form(w, w)
        rest = []
        for v in pool:
            c = Fraction(form(v, w)) / qw
            u = tuple(a - c * b for a, b in zip(v, w)) if c else v
            rest.append(_primitive(u))
        pool = rest
        out.append(w)
    return out


def cartan_dieudonne(phi: RationalIsometry) -> list[tuple[int, ...]]:
    """Write ``phi`` as a product of reflections.

    Returns primitive anisotropic vectors ``x_1, ..., x_k`` with
    ``phi = r_{x_1} o r_{x_2} o ... o r_{x_k}``.

    The loop keeps an orthogonal anisotropic basis ``W`` of the subspace on
    which the running map ``tau`` may still act nontrivially; ``tau`` fixes
    the orthogonal complement of ``W`` pointwise.  Each round finds an
    anisotropic ``v`` in ``W`` with ``tau v - v`` anisotropic and reflects in
    that difference, which makes ``v`` fixed and shrinks ``W`` by one.  If no
    such ``v`` exists, ``(tau - 1) W`` is totally isotropic; one extra
    reflection in a vector of ``W`` flips the determinant on ``W`` and ends
    that situation.
    """
    L = phi.lattice
    G = L.gram
    form = lambda u, v: dot(u, G @ tuple(v))
    tau = phi.matrix
    W = orthogonal_basis(G)
    out: list[tuple[int, ...]] = []

    def reflect_tau(u):
        nonlocal tau
        tau = _reflection_matrix(G, u, form(u, u)) @ tau
        out.append(u)

    while W:
        diffs = [tuple(a - b for a, b in zip(tau @ w, w)) for w in W]
        if not any(any(d) for d in diffs):
            break
        pick = _find_moving_vector(W, diffs, form)
        if pick is None:
            reflect_tau(W[0])
            continue
        i, j, t = pick
        v = W[i] if j is None else tuple(a + t * b for a, b in zip(W[i], W[j]))
        u = _primitive(tuple(a - b for a, b in zip(tau @ v, v)))
        reflect_tau(u)
        if j is None:
            W = W[:i] + W[i + 1:]
        else:
            qi, qj = form(W[i], W[i]), form(W[j], W[j])
            perp = _primitive(tuple(t * qj * a - qi * b for a, b in zip(W[i], W[j])))
            W = [w for k, w in enumerate(W) if k not in (i, j)] + [perp]
    check(tau == Matrix.identity(L.rank), "reflections do not recompose")
    return out


def _find_moving_vector(W, diffs, form):
    """Locate ``v = W[i] + t W[j]`` (or ``W[i]``) with ``q(v)`` and ``q(tau v - v)`` nonzero."""
    qd = [form(d, d) if any(d) else 0 for d in diffs]
    for i, q in enumerate(qd):
        if q != 0:
            return i, None, 0
    qw = [form(w, w) for w in W]
    for i in range(len(W)):
        if not any(diffs[i]):
            continue
        for j in range(len(W)):
            if j == i or not any(diffs[j]):
                continue
            b = form(diffs[i], diffs[j])
            if b == 0:
                continue
            for t in (1, -1, 2, -2, 3, -3):
                if qw[i] + t * t * qw[j] != 0 and qd[i] + 2 * t * b + t * t * qd[j] != 0:
                    return i, j, t
    return None


def compose_reflections(L: Lattice, vectors: Sequence[Sequence[int]]) -> RationalIsometry:
    """``r_{x_1} o ... o r_{x_k}`` for a list of anisotropic vectors."""
    out = Matrix.identity(L.rank)
    for x in vectors:
        out = out @ _reflection_matrix(L.gram, tuple(x), L.norm(x))
    return RationalIsometry(L, out)


# -- Eichler transvections and transitivity ---------------------------------


def eichler_transvection(L: Lattice, f: Sequence[int], w: Sequence[int]) -> RationalIsometry:
    """``E(f, w): v -> v + (v,f) w - (v,w) f - (w,w)/2 (v,f) f``."""
    f, w = L.check_vector(f), L.check_vector(w)
    if any(type(x) is not int for x in f + w):
        raise ValueError("f and w must be lattice vectors")
    if L.norm(f) != 0:
        raise ValueError("f must be isotropic")
    if L.inner(f, w) != 0:
        raise ValueError("w must be orthogonal to f")
    qw = L.norm(w)
    if qw % 2:
        raise ValueError("(w,w) must be even")
    Gf, Gw = L.gram @ f, L.gram @ w
    n = L.rank
    rows = [[int(i == j) + w[i] * Gf[j] - f[i] * Gw[j] - (qw // 2) * f[i] * Gf[j]
             for j in range(n)] for i in range(n)]
    return RationalIsometry(L, Matrix(rows, ncols=n))


class _Mover:
    """Accumulates transvections applied to a vector and to a running isometry."""

    def __init__(self, L: Lattice, y: Sequence[int]):
        self.L = L
        self.n = L.rank
        self.y = list(y)
        self.cols = [[int(i == j) for i in range(self.n)] for j in range(self.n)]

    def transvect(self, f, w):
        G = self.L.gram
        Gf, Gw = G @ tuple(f), G @ tuple(w)
        half = dot(w, Gw) // 2
        for v in [self.y] + self.cols:
            a, b = dot(v, Gf), dot(v, Gw)
            if a or b:
                c = -b - half * a
                for i in range(self.n):
                    v[i] += a * w[i] + c * f[i]

    def unit(self, i):
        return [int(j == i) for j in range(self.n)]

    def scaled(self, i, k):
        return [k * int(j == i) for j in range(self.n)]

    # Writing y = a e1 + b e2 + c f1 + d f2 + z, the matrix [[a, c], [d, -b]]
    # undergoes elementary row and column additions under these moves.
    def row1_sub(self, k):  # a -= k d, c += k b
        self.transvect(self.unit(E1), self.scaled(F1, k))

    def row2_add(self, k):  # d += k a, b -= k c
        self.transvect(self.unit(E2), self.scaled(F2, k))

    def col1_sub(self, k):  # a -= k c, d += k b
        self.transvect(self.unit(E1), self.scaled(F2, k))

    def col2_add(self, k):  # c += k a, b -= k d
        self.transvect(self.unit(E2), self.scaled(F1, k))

    def matrix(self):
        y = self.y
        return y[E1], y[F1], y[F2], -y[E2]

    def isometry(self) -> RationalIsometry:
        return RationalIsometry(self.L, Matrix.from_columns(self.cols, nrows=self.n))


def _diagonalize_hyperbolic_block(mv: _Mover):
    """Reduce ``[[a, c], [d, -b]]`` to ``diag(g, *)`` with ``g`` the gcd of all four.

    A 2x2 Smith reduction using only the four addition moves; swaps are
    composed from three additions and flip one sign, which is harmless.
    """

    def near(x, p):
        q, r = divmod(x, p)
        return q + 1 if 2 * abs(r) > abs(p) else q  # r shares the sign of p

    def swap_rows():
        mv.row1_sub(-1)
        mv.row2_add(-1)
        mv.row1_sub(-1)

    def swap_cols():
        mv.col1_sub(-1)
        mv.col2_add(-1)
        mv.col1_sub(-1)

    while True:
        a, c, d, e = mv.matrix()
        if c == 0 and d == 0:
            if a == 0 and e == 0:
                return
            if a != 0 and e % a == 0:
                return
            if a != 0:
                mv.row1_sub(-1)  # row1 += row2 puts e next to the pivot
                continue
        entries = {(0, 0): a, (0, 1): c, (1, 0): d, (1, 1): e}
        (i, j), _ = min(((k, v) for k, v in entries.items() if v), key=lambda kv: abs(kv[1]))
        if i == 1:
            swap_rows()
        if j == 1:
            swap_cols()
        a, c, d, _ = mv.matrix()
        if c:
            mv.col2_add(-near(c, a))
        if d:
            mv.row2_add(-near(d, a))


def map_primitive_to_standard(y: Sequence[int], lattice: Lattice | None = None) -> RationalIsometry:
    """An integral isometry ``g`` with ``g(y) = e1 + d e2``, where ``(y, y) = 2d``.

    The lattice must be ``U + U + N`` with ``N`` unimodular (the K3 lattice by
    default); ``e1, e2`` span the first hyperbolic plane.
    """
    L = lattice or k3_lattice()
    _check_two_hyperbolic_planes(L)
    y = L.check_vector(y)
    if not is_primitive(L, y):
        raise ValueError("y must be primitive")
    q = L.norm(y)
    mv = _Mover(L, y)
    _diagonalize_hyperbolic_block(mv)
    a = mv.y[E1]
    if abs(a) != 1:
        z = mv.y[4:]
        check(any(z), "primitive vector with imprimitive hyperbolic part needs a tail")
        Gz = (L.gram @ tuple(mv.y))[4:]
        cz, coeffs = gcd_coefficients(Gz)
        # E(f2, w) with w in N moves (z, w) into the f2 slot and leaves z alone
        w = [0, 0, 0, 0] + [-x for x in coeffs]
        mv.transvect(mv.unit(F2), w)
        check(mv.y[F2] == cz, "tail transvection failed")
        _diagonalize_hyperbolic_block(mv)
        a = mv.y[E1]
    check(abs(a) == 1 and mv.y[F1] == 0 and mv.y[F2] == 0, "hyperbolic reduction failed")
    tail = [0, 0, 0, 0] + [-a * x for x in mv.y[4:]]
    if any(tail):
        mv.transvect(mv.unit(E2), tail)
    if mv.y[E1] == -1:
        for v in [mv.y] + mv.cols:
            v[E1], v[E2] = -v[E1], -v[E2]
    g = mv.isometry()
    target = tuple([1, q // 2] + [0] * (L.rank - 2))
    check(g(y) == target, "transitivity postcondition failed")
    return g


def _check_two_hyperbolic_planes(L: Lattice):
    G = L.gram
    if L.rank < 4 or G.submatrix(range(4), range(L.rank)).rows() != [
        tuple(int(j == (i ^ 1)) for j in range(L.rank)) for i in range(4)
    ]:
        raise ValueError("lattice must start with two orthogonal hyperbolic planes")
    if L.rank > 4 and abs(G.submatrix(range(4, L.rank), range(4, L.rank)).det()) != 1:
        raise ValueError("complement of U + U must be unimodular")
    if not L.is_even():
        raise ValueError("lattice must be even")


# -- the K3 lattice specifics -----------------------------------------------

_POSITIVE_FRAME = [(E1, E2), (F1, F2), (G1, G2)]


def is_signed(phi: RationalIsometry) -> bool:
    """Whether ``phi`` preserves the orientation of positive 3-planes.

    The reference frame is ``e1+e2, f1+f2, g1+g2``; the sign of the
    determinant of ``((phi v_i, v_j))`` decides.
    """
    L = phi.lattice
    if L.rank != 22 or L.gram != k3_lattice().gram:
        raise ValueError("signedness is defined on the K3 lattice")
    frame = []
    for i, j in _POSITIVE_FRAME:
        v = [0] * 22
        v[i] = v[j] = 1
        frame.append(tuple(v))
    P = Matrix([[L.inner(phi(vi), vj) for vj in frame] for vi in frame], ncols=3)
    d = P.det()
    check(d != 0, "positive frame projects degenerately")
    return d > 0


def embed_U_isometry(f: RationalIsometry, lattice: Lattice | None = None) -> RationalIsometry:
    """Extend an isometry of ``U`` by the identity on the complement of the first ``U``."""
    L = lattice or k3_lattice()
    if f.lattice.rank != 2 or f.lattice.gram != Matrix([[0, 1], [1, 0]]):
        raise ValueError("f must be an isometry of U")
    return RationalIsometry(L, Matrix.block_diagonal(f.matrix, Matrix.identity(L.rank - 2)))


def u_isometry(a: int, b: int) -> RationalIsometry:
    """``f_(a,b) = diag(a/b, b/a)`` on ``U``."""
    from .lattices import hyperbolic_plane

    return RationalIsometry(hyperbolic_plane(), Matrix.diagonal([Fraction(a, b), Fraction(b, a)]))


# -- random integral isometries (explicit RNG) ------------------------------


def random_root(L: Lattice, rng: random.Random, sign: int | None = None, spread: int = 3) -> tuple[int, ...]:
    """A random primitive vector of square ``+-2`` in a lattice starting with ``U``.

    Picks a hyperbolic plane ``(e, e')`` among the leading ones, a small
    random tail ``z`` orthogonal to it, and solves for the ``e'``
    coefficient.
    """
    sign = sign if sign is not None else rng.choice((1, -1))
    planes = [p for p in ((0, 1), (2, 3), (4, 5)) if p[1] < L.rank
              and L.gram[p[0], p[1]] == 1 and L.gram[p[0], p[0]] == 0 and L.gram[p[1], p[1]] == 0]
    i, j = rng.choice(planes)
    if rng.random() < 0.5:
        i, j = j, i
    z = [0] * L.rank
    for k in rng.sample([k for k in range(L.rank) if k not in (i, j)], min(spread, L.rank - 2)):
        z[k] = rng.randint(-1, 1)
    qz = L.norm(z)
    d = (2 * sign - qz) // 2
    z[i], z[j] = 1, d
    x = tuple(z)
    check(L.norm(x) == 2 * sign, "root construction failed")
    return x


def random_integral_isometry(L: Lattice, rng: random.Random, steps: int = 3) -> RationalIsometry:
    """A product of ``steps`` reflections in random roots of square ``+-2``."""
    M = Matrix.identity(L.rank)
    for _ in range(steps):
        x = random_root(L, rng)
        M = M @ _reflection_matrix(L.gram, x, L.norm(x))
    return RationalIsometry(L, M)
