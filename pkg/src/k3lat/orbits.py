"""Discriminant modules, lagrangian subgroups and double cosets ``O(L) phi O(L)``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .exactlinalg import Matrix, dot, gcd_coefficients, integer_kernel, smith_normal_form
from .isometry import (
    RationalIsometry,
    check,
    coinvariant_sublattice,
    cyclic_type,
    eichler_transvection,
    embed_U_isometry,
    map_primitive_to_standard,
    u_isometry,
)
from .lattices import Lattice, embed, hyperbolic_plane, is_primitive, k3_lattice

Element = tuple[int, ...]


def _mod2(x: Fraction) -> Fraction:
    return x - 2 * math.floor(x / 2)


def _mod1(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass(frozen=True)
class FiniteQuadraticModule:
    """A finite group ``I*/I`` with its residual form ``q: I*/I -> Q/2Z``.

    Elements are coordinate tuples ``x`` with ``0 <= x_i < d_i``; the element
    lifts to ``sum x_i * generator_lifts[i]`` in the ambient rational space.
    ``coordinate_map`` sends a vector of ``I*`` to unreduced coordinates.
    """

    elementary_divisors: tuple[int, ...]
    generator_lifts: tuple[tuple, ...]
    gram: Matrix
    coordinate_map: Matrix
    _pairings: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lifts = self.generator_lifts
        Gl = [self.gram @ v for v in lifts]
        pairings = tuple(tuple(Fraction(dot(u, w)) for w in Gl) for u in lifts)
        object.__setattr__(self, "_pairings", pairings)

    @property
    def order(self) -> int:
        return math.prod(self.elementary_divisors)

    @property
    def rank(self) -> int:
        return len(self.elementary_divisors)

    def zero(self) -> Element:
        return (0,) * self.rank

    def elements(self) -> Iterator[Element]:
        return itertools.product(*(range(d) for d in self.elementary_divisors))

    def reduce(self, x: Sequence[int]) -> Element:
        return tuple(int(a) % d for a, d in zip(x, self.elementary_divisors))

    def add(self, x: Element, y: Element) -> Element:
        return self.reduce(a + b for a, b in zip(x, y))

    def scale(self, k: int, x: Element) -> Element:
        return self.reduce(k * a for a in x)

    def order_of(self, x: Element) -> int:
        return math.lcm(1, *(d // math.gcd(a, d) for a, d in zip(x, self.elementary_divisors)))

    def lift(self, x: Element) -> tuple:
        n = self.gram.nrows
        out = [Fraction(0)] * n
        for a, v in zip(x, self.generator_lifts):
            if a:
                out = [o + a * Fraction(c) for o, c in zip(out, v)]
        return tuple(out)

    def element_of(self, v: Sequence) -> Element:
        """The class of an ambient vector ``v`` of ``I*``."""
        coords = self.coordinate_map @ tuple(v)
        if any(Fraction(c).denominator != 1 for c in coords):
            raise ValueError("vector is not in the dual lattice")
        return self.reduce(int(c) for c in coords)

    def _form(self, x, y) -> Fraction:
        P = self._pairings
        return sum((a * b * P[i][j] for i, a in enumerate(x) if a
                    for j, b in enumerate(y) if b), Fraction(0))

    def q(self, x: Element) -> Fraction:
        """Residual quadratic form, as a representative in ``[0, 2)``."""
        return _mod2(self._form(x, x))

    def b(self, x: Element, y: Element) -> Fraction:
        """Residual bilinear form, as a representative in ``[0, 1)``."""
        return _mod1(self._form(x, y))

    def subgroup(self, generators: Sequence[Element]) -> "ModuleSubgroup":
        gens = tuple(self.reduce(g) for g in generators)
        seen = {self.zero()}
        frontier = [self.zero()]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return ModuleSubgroup(gens, frozenset(seen))

    def is_isotropic(self, H: "ModuleSubgroup") -> bool:
        return all(self.q(x) == 0 for x in H.elements)


@dataclass(frozen=True)
class ModuleSubgroup:
    generators: tuple[Element, ...] = field(compare=False)
    elements: frozenset

    @property
    def order(self) -> int:
        return len(self.elements)

    def __and__(self, other: "ModuleSubgroup") -> "ModuleSubgroup":
        common = self.elements & other.elements
        return ModuleSubgroup(tuple(sorted(common)), frozenset(common))

    def __contains__(self, x) -> bool:
        return tuple(x) in self.elements


def discriminant_module(L: Lattice, I_basis: Matrix) -> FiniteQuadraticModule:
    """``I*/I`` for a finite-index sublattice ``I`` of an even lattice ``L``.

    With ``D`` the dual basis, ``I = D (B^T G B) Z^r``; a Smith form of the
    Gram matrix of ``I`` then splits the quotient into cyclic factors.
    """
    if not L.is_even():
        raise ValueError("residual quadratic form needs an even lattice")
    B = I_basis
    if B.shape != (L.rank, L.rank) or not B.is_integral():
        raise ValueError("I must be given by a square integral basis")
    G = L.gram
    gram_I = B.T @ G @ B
    if gram_I.det() == 0:
        raise ValueError("sublattice is degenerate")
    D = B @ gram_I.inverse()
    snf = smith_normal_form(gram_I)
    keep = [i for i, s in enumerate(snf.divisors) if s > 1]
    DU = D @ snf.U
    lifts = tuple(DU.column(i) for i in keep)
    cmap = (snf.U_inv @ B.T @ G).submatrix(keep, range(L.rank))
    return FiniteQuadraticModule(tuple(snf.divisors[i] for i in keep), lifts, G, cmap)


def u_case_module(a: int, b: int) -> FiniteQuadraticModule:
    """``I_f*/I_f`` for ``f = diag(a/b, b/a)`` on ``U``, with generators ``e1/a`` and ``e2/b``."""
    if a <= 0 or b <= 0 or math.gcd(a, b) != 1:
        raise ValueError("need coprime positive a, b")
    n = a * b
    U = hyperbolic_plane()
    lifts = ((Fraction(1, a), 0), (0, Fraction(1, b)))
    if n == 1:
        return FiniteQuadraticModule((), (), U.gram, Matrix.zeros(0, 2))
    return FiniteQuadraticModule((n, n), lifts, U.gram, Matrix.diagonal([a, b]))


def enumerate_lagrangians(M: FiniteQuadraticModule, n: int, cap: int = 10_000) -> list[ModuleSubgroup]:
    """All cyclic isotropic subgroups of order ``n`` in a module of order ``n^2``."""
    if M.order != n * n:
        raise ValueError(f"module has order {M.order}, expected {n * n}")
    if M.order > cap:
        raise ValueError(f"module of order {M.order} exceeds the enumeration cap {cap}")
    found: dict[frozenset, ModuleSubgroup] = {}
    for x in M.elements():
        if M.order_of(x) != n or M.q(x) != 0:
            continue
        elems = frozenset(M.scale(k, x) for k in range(n))
        if elems in found:
            continue
        H = ModuleSubgroup((x,), elems)
        if M.is_isotropic(H):
            found[elems] = H
    return sorted(found.values(), key=lambda H: sorted(H.elements))


def _ambient_vector(M: FiniteQuadraticModule, coords: dict[int, Fraction]) -> tuple:
    v = [Fraction(0)] * M.gram.nrows
    for i, c in coords.items():
        v[i] = c
    return tuple(v)


def lagrangian_from_pair(M: FiniteQuadraticModule, a: int, b: int, c: int, d: int) -> ModuleSubgroup:
    """``L_(c,d)``: the subgroup generated by ``(c/a) e1`` and ``(d/b) e2``.

    ``M`` is the module of ``f_(a,b)`` on ``U`` (or of its extension to a
    bigger lattice whose first two coordinates span ``U``).
    """
    n = a * b
    if c * d != n or c <= 0 or d <= 0:
        raise ValueError("need cd = ab")
    if math.gcd(c, d) != 1:
        raise ValueError("c and d must be coprime")
    gens = [M.element_of(_ambient_vector(M, {0: Fraction(c, a)})),
            M.element_of(_ambient_vector(M, {1: Fraction(d, b)}))]
    H = M.subgroup(gens)
    check(H.order == n and M.is_isotropic(H), "L_(c,d) must be lagrangian")
    return H


def image_subgroup(M: FiniteQuadraticModule, basis: Matrix) -> ModuleSubgroup:
    """Image in ``I*/I`` of a lattice ``I <= N <= I*`` given by a basis."""
    return M.subgroup([M.element_of(col) for col in basis.columns()])


# -- the hyperbolic plane ---------------------------------------------------


@dataclass(frozen=True)
class UCanonicalPair:
    """Representative ``f_(a,b) = diag(a/b, b/a)`` of a double coset in ``O(U_Q)``."""

    a: int
    b: int

    def __post_init__(self):
        a, b = self.a, self.b
        if b <= 0 or a < b or math.gcd(a, b) != 1 or (a == b and a != 1):
            raise ValueError(f"invalid canonical pair ({a}, {b})")

    @property
    def n(self) -> int:
        return self.a * self.b

    def isometry(self) -> RationalIsometry:
        return u_isometry(self.a, self.b)


def orthogonal_group_of_U() -> list[RationalIsometry]:
    U = hyperbolic_plane()
    mats = [[[1, 0], [0, 1]], [[-1, 0], [0, -1]], [[0, 1], [1, 0]], [[0, -1], [-1, 0]]]
    return [RationalIsometry(U, Matrix(m)) for m in mats]


def u_double_orbit_decompose(f: RationalIsometry) -> tuple[RationalIsometry, UCanonicalPair, RationalIsometry]:
    """``(k1, pair, k2)`` with ``f = k1 o f_pair o k2`` and ``k1, k2 in O(U)``."""
    if f.lattice.gram != hyperbolic_plane().gram:
        raise ValueError("f must be an isometry of U")
    group = orthogonal_group_of_U()
    for k1 in group:
        for k2 in group:
            m = (k1 @ f @ k2).matrix
            lam = m[0, 0]
            if m[0, 1] == 0 and m[1, 0] == 0 and lam >= 1:
                lam = Fraction(lam)
                pair = UCanonicalPair(lam.numerator, lam.denominator)
                return k1.inverse(), pair, k2.inverse()
    check(False, "isometry of U_Q is neither diagonal nor antidiagonal")


def u_double_orbit_canonical(f: RationalIsometry) -> UCanonicalPair:
    return u_double_orbit_decompose(f)[1]


# -- orbits of primitive vectors ---------------------------------------------


def congruence_orbit_test(l1: Sequence[int], l2: Sequence[int], n: int,
                          lattice: Lattice | None = None) -> int | None:
    """Least ``k`` coprime to ``n`` with ``(l1,l1)/2 = k^2 (l2,l2)/2 mod n``, if any."""
    L = lattice or k3_lattice()
    if n <= 0:
        raise ValueError("n must be positive")
    for v in (l1, l2):
        if not is_primitive(L, v):
            raise ValueError("inputs must be primitive")
    d1, d2 = L.norm(l1) // 2, L.norm(l2) // 2
    for k in range(1, n + 1):
        if math.gcd(k, n) == 1 and (d1 - k * k * d2) % n == 0:
            return k
    return None


def vector_to_vector(l1: Sequence[int], l2: Sequence[int], lattice: Lattice | None = None) -> RationalIsometry:
    """An integral isometry sending ``l1`` to ``l2`` (primitive, equal squares)."""
    L = lattice or k3_lattice()
    if L.norm(l1) != L.norm(l2):
        raise ValueError("vectors of different squares lie in different orbits")
    s1 = map_primitive_to_standard(l1, L)
    s2 = map_primitive_to_standard(l2, L)
    return s2.inverse() @ s1


# -- double orbit reduction ---------------------------------------------------


@dataclass(frozen=True)
class DoubleOrbitReduction:
    """``phi = g o f~_pair o h`` with ``g, h`` integral."""

    g: RationalIsometry
    pair: UCanonicalPair
    h: RationalIsometry

    def middle(self) -> RationalIsometry:
        return embed_U_isometry(self.pair.isometry(), self.g.lattice)

    def recompose(self) -> RationalIsometry:
        return self.g @ self.middle() @ self.h


def _cyclic_functional(phi: RationalIsometry, n: int) -> tuple[int, ...]:
    """A vector ``y`` with ``I_phi = {l : (y, l) = 0 mod n}``."""
    L = phi.lattice
    B = coinvariant_sublattice(phi)
    snf = smith_normal_form(B)
    check(snf.divisors[-1] == n and all(d == 1 for d in snf.divisors[:-1]), "quotient is not Z/n")
    ell = snf.U_inv.row(L.rank - 1)
    y = L.gram.inverse() @ ell
    check(all(Fraction(c).denominator == 1 for c in y), "lattice must be unimodular")
    y = tuple(int(c) for c in y)
    check(all(L.inner(y, col) % n == 0 for col in B.columns()), "functional does not vanish on I_phi")
    return y


def _primitive_in_coset(y: Sequence[int], n: int) -> tuple[int, ...]:
    """A primitive vector congruent to ``y`` modulo ``n`` (``gcd(content(y), n) = 1``)."""
    y = list(y)
    if math.gcd(*y) == 1:
        return tuple(y)
    i = next(k for k, v in enumerate(y) if v)
    rest = math.gcd(*(v for k, v in enumerate(y) if k != i))
    if rest == 0:
        j = 1 if i == 0 else 0
        y[j] += n
        return tuple(y)
    # t is built from the primes of rest that divide neither n nor y_i
    g = rest
    while (c := math.gcd(g, n)) > 1:
        g //= c
    t = g
    while (c := math.gcd(t, y[i])) > 1:
        t //= c
    y[i] += t * n
    check(math.gcd(*y) == 1, "coset primitivity failed")
    return tuple(y)


def _hyperbolic_pair_in(L: Lattice, T: Matrix) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Isotropic ``u1, u2`` with ``(u1, u2) = 1`` in an even unimodular rank-2 lattice ``T``."""
    t1, t2 = T.columns()
    p2, q, r2 = L.norm(t1), L.inner(t1, t2), L.norm(t2)
    p = p2 // 2
    if p == 0:
        x, y = 1, 0
    else:
        # 2p x^2 + 2q xy + 2r y^2 has discriminant q^2 - 4pr = 1
        x, y = 1 - q, 2 * p
        g = math.gcd(x, y)
        x, y = x // g, y // g
    u1 = tuple(x * a + y * b for a, b in zip(t1, t2))
    check(L.norm(u1) == 0, "isotropic vector search failed")
    g, (s, t) = gcd_coefficients([L.inner(u1, t1), L.inner(u1, t2)])
    check(g == 1, "rank-2 complement is not unimodular")
    u2 = tuple(s * a + t * b for a, b in zip(t1, t2))
    half = L.norm(u2) // 2
    u2 = tuple(a - half * b for a, b in zip(u2, u1))
    return u1, u2


def double_orbit_reduce(phi: RationalIsometry, canonical: bool = True) -> DoubleOrbitReduction:
    """Write an ``n``-cyclic ``phi`` as ``g o f~_(a,b) o h`` with ``g, h`` integral.

    With ``canonical=True`` the pair is always ``(n, 1)``, the single
    double coset of ``n``-cyclic isometries.  Otherwise the pair is the one
    met along the way, which already lies in the right double coset but
    need not be ``(n, 1)``.

    The lattice must be ``U + U + N`` with ``N`` even unimodular.
    """
    L = phi.lattice
    n = cyclic_type(phi)
    if n is None:
        raise ValueError("isometry is not of cyclic type")
    ident = RationalIsometry.identity(L)
    if n == 1:
        red = DoubleOrbitReduction(phi, UCanonicalPair(1, 1), ident)
        check(red.recompose() == phi, "recomposition failed")
        return red
    r = L.rank
    y = _primitive_in_coset(_cyclic_functional(phi, n), n)
    g0 = map_primitive_to_standard(y, L)
    phi1 = phi @ g0.inverse()
    # phi1 maps the complement of the first U integrally; its image has a
    # unimodular rank-2 complement T, which is moved back onto U.
    images = [phi1(tuple(int(i == k) for i in range(r))) for k in range(2, r)]
    A = Matrix([L.gram @ v for v in images], ncols=r)
    T = integer_kernel(A)
    check(T.ncols == 2, "complement must have rank 2")
    u1, u2 = _hyperbolic_pair_in(L, T)
    h1 = map_primitive_to_standard(u1, L)
    s = h1(u2)
    tail = tuple([0, 0] + [-c for c in s[2:]])
    h = (eichler_transvection(L, embed((1,), 0, r), tail) if any(tail) else ident) @ h1
    check(h(u1) == embed((1, 0), 0, r) and h(u2) == embed((0, 1), 0, r), "complement not moved onto U")
    psi = h @ phi1
    M = psi.matrix
    check(all(M[i, j] == 0 for i in range(2) for j in range(2, r))
          and all(M[i, j] == 0 for i in range(2, r) for j in range(2)), "not block diagonal")
    f = RationalIsometry(hyperbolic_plane(), M.submatrix(range(2), range(2)))
    psi2 = RationalIsometry(L, Matrix.block_diagonal(Matrix.identity(2), M.submatrix(range(2, r), range(2, r))))
    check(psi2.is_integral(), "complementary block must be integral")
    k1, pair, k2 = u_double_orbit_decompose(f)
    G = h.inverse() @ psi2 @ embed_U_isometry(k1, L)
    H = embed_U_isometry(k2, L) @ g0
    if canonical and pair.b != 1:
        G, H = _to_standard_pair(G, pair, H, L)
        pair = UCanonicalPair(n, 1)
    red = DoubleOrbitReduction(G, pair, H)
    check(pair.n == n, "pair does not multiply to the cyclic type")
    check(G.is_integral() and H.is_integral(), "outer factors must be integral")
    check(red.recompose() == phi, "recomposition failed")
    return red


def _to_standard_pair(G, pair, H, L):
    """Rewrite ``G o f~_(a,b) o H`` as ``G' o f~_(n,1) o H'``.

    ``(b e1 + a e2)/n`` generates ``I*/L`` for ``f~_(a,b)``; an integral
    ``g`` carrying ``b e1 + a e2`` to ``e1 + n e2`` carries one coinvariant
    lattice onto the other, and then ``f~_(a,b) g^-1 f~_(n,1)^-1`` is
    integral.
    """
    a, b, n = pair.a, pair.b, pair.n
    r = L.rank
    g = vector_to_vector(embed((b, a), 0, r), embed((1, n), 0, r), L)
    f1 = embed_U_isometry(u_isometry(a, b), L)
    f2 = embed_U_isometry(u_isometry(n, 1), L)
    k = f1 @ g.inverse() @ f2.inverse()
    check(k.is_integral(), "equal coinvariant lattices must give an integral quotient")
    return G @ k, g @ H


def double_orbit_witness(phi1: RationalIsometry, phi2: RationalIsometry) -> tuple[RationalIsometry, RationalIsometry]:
    """Integral ``(g, h)`` with ``phi1 = g o phi2 o h``; raises if none exists."""
    r1, r2 = double_orbit_reduce(phi1), double_orbit_reduce(phi2)
    if r1.pair != r2.pair:
        raise ValueError("isometries lie in different double orbits")
    g = r1.g @ r2.g.inverse()
    h = r2.h.inverse() @ r1.h
    check(g @ phi2 @ h == phi1, "witness does not recompose")
    return g, h
