"""Mukai vectors and degree-4 correspondences between two K3 surfaces.

Cohomology of ``S x M`` is modelled by even Kunneth bidegrees ``(p, q)`` with
``p, q in {0, 2, 4}``.  Component ``(p, q)`` is stored as a matrix of shape
``dim(p) x dim(q)`` where ``dim(0) = dim(4) = 1`` and ``dim(2) = 22``; both
factors use the K3 lattice coordinates, and ``e_i . e_j = G_ij [pt]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactlinalg import Matrix, dot, integral_preimage_divisors
from .isometry import QuotientStructure, check
from .lattices import Lattice, embed, k3_lattice

RANK = 22
DEGREES = (0, 2, 4)


def _dim(p: int) -> int:
    return RANK if p == 2 else 1


def _gram() -> Matrix:
    return k3_lattice().gram


# -- Mukai vectors ------------------------------------------------------------


@dataclass(frozen=True)
class MukaiVector:
    """``(r, c, s)`` in ``H^0 + H^2 + H^4`` of a K3 surface."""

    r: int | Fraction
    c: tuple
    s: int | Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(self.c))
        if len(self.c) != RANK:
            raise ValueError(f"H^2 part must have {RANK} coordinates")

    def as_tuple(self) -> tuple:
        return (self.r, *self.c, self.s)


def mukai_pairing(v: MukaiVector, w: MukaiVector):
    """``-v4 w0 + (v2, w2) - v0 w4``."""
    G = _gram()
    return -v.s * w.r + dot(v.c, G @ w.c) - v.r * w.s


def mukai_lattice() -> Lattice:
    """The Mukai lattice in ``(r, c, s)`` coordinates."""
    G = _gram()
    n = RANK + 2
    rows = [[0] * n for _ in range(n)]
    rows[0][n - 1] = rows[n - 1][0] = -1
    for i in range(RANK):
        for j in range(RANK):
            rows[i + 1][j + 1] = G[i, j]
    return Lattice(Matrix(rows), "Mukai")


def exp_action(alpha: Sequence, v: MukaiVector) -> MukaiVector:
    """Multiplication by ``exp(alpha)``: ``(r, c, s) -> (r, c + r a, s + (c, a) + r (a, a)/2)``."""
    alpha = tuple(alpha)
    if len(alpha) != RANK:
        raise ValueError(f"alpha must have {RANK} coordinates")
    G = _gram()
    Ga = G @ alpha
    aa = Fraction(dot(alpha, Ga))
    s = v.s + dot(v.c, Ga) + v.r * aa / 2
    c = tuple(ci + v.r * ai for ci, ai in zip(v.c, alpha))
    integral = all(type(x) is int for x in (v.r, v.s, *v.c, *alpha))
    if integral:
        check(s.denominator == 1, "e^alpha left the integral lattice")
    s = s.numerator if s.denominator == 1 else s
    return MukaiVector(v.r, c, s)


# -- Kunneth kernels ----------------------------------------------------------


def _as_component(p: int, q: int, value) -> Matrix:
    shape = (_dim(p), _dim(q))
    if isinstance(value, Matrix):
        m = value
    elif shape == (1, 1):
        m = Matrix([[value]])
    elif shape[1] == 1:
        m = Matrix([[x] for x in value], ncols=1)
    elif shape[0] == 1:
        m = Matrix([list(value)])
    else:
        m = Matrix(value)
    if m.shape != shape:
        raise ValueError(f"component ({p},{q}) must have shape {shape}, got {m.shape}")
    return m


class KunnethKernel:
    """An even cohomology class on ``S x M``, stored by bidegree."""

    __slots__ = ("_parts",)

    def __init__(self, components: dict | None = None):
        parts = {}
        for (p, q), value in (components or {}).items():
            if p not in DEGREES or q not in DEGREES:
                raise ValueError(f"bidegree ({p},{q}) out of range")
            m = _as_component(p, q, value)
            if any(any(r) for r in m.numerators):
                parts[p, q] = m
        self._parts = parts

    @classmethod
    def from_S(cls, degree: int, value) -> "KunnethKernel":
        """Pullback of a class of degree ``degree`` on ``S``."""
        return cls({(degree, 0): value})

    @classmethod
    def from_M(cls, degree: int, value) -> "KunnethKernel":
        return cls({(0, degree): value})

    @classmethod
    def pure_tensor(cls, alpha: Sequence, beta: Sequence) -> "KunnethKernel":
        """``pi_S^* alpha . pi_M^* beta`` for ``alpha, beta`` in ``H^2``."""
        return cls({(2, 2): Matrix([[a * b for b in beta] for a in alpha], ncols=RANK)})

    def matrix(self, p: int, q: int) -> Matrix:
        return self._parts.get((p, q)) or Matrix.zeros(_dim(p), _dim(q))

    def component(self, p: int, q: int):
        """Scalar, 22-tuple or 22x22 matrix according to the bidegree."""
        m = self.matrix(p, q)
        if m.shape == (1, 1):
            return m[0, 0]
        if m.ncols == 1:
            return m.column(0)
        if m.nrows == 1:
            return m.row(0)
        return m

    def bidegrees(self) -> list[tuple[int, int]]:
        return sorted(self._parts)

    def _map(self, fn) -> "KunnethKernel":
        return KunnethKernel({k: fn(m) for k, m in self._parts.items()})

    def __add__(self, other: "KunnethKernel") -> "KunnethKernel":
        parts = dict(self._parts)
        for k, m in other._parts.items():
            parts[k] = parts[k] + m if k in parts else m
        return KunnethKernel(parts)

    def __neg__(self) -> "KunnethKernel":
        return self._map(lambda m: -m)

    def __sub__(self, other: "KunnethKernel") -> "KunnethKernel":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, KunnethKernel):
            return self._product(other)
        return self._map(lambda m: m * other)

    def __rmul__(self, scalar):
        return self._map(lambda m: m * scalar)

    def __truediv__(self, scalar):
        return self * (1 / Fraction(scalar))

    def __eq__(self, other):
        if not isinstance(other, KunnethKernel):
            return NotImplemented
        return self._parts == other._parts

    def __repr__(self):
        return f"KunnethKernel(bidegrees={self.bidegrees()})"

    def degree_part(self, k: int) -> "KunnethKernel":
        return KunnethKernel({pq: m for pq, m in self._parts.items() if sum(pq) == k})

    def truncate(self, k: int) -> "KunnethKernel":
        return KunnethKernel({pq: m for pq, m in self._parts.items() if sum(pq) <= k})

    def _product(self, other: "KunnethKernel") -> "KunnethKernel":
        G = _gram()
        out: dict = {}
        for (p1, q1), A in self._parts.items():
            for (p2, q2), B in other._parts.items():
                if p1 + p2 > 4 or q1 + q2 > 4:
                    continue
                C = _bidegree_product(A, B, p1, p2, q1, q2, G)
                key = (p1 + p2, q1 + q2)
                out[key] = out[key] + C if key in out else C
        return KunnethKernel(out)


def _contract_M(u: Sequence, v: Sequence, q1: int, q2: int, G: Matrix) -> list:
    """Cup product on the ``M`` factor of a degree ``q1`` and a degree ``q2`` class."""
    if q1 == 2 and q2 == 2:
        return [dot(u, G @ tuple(v))]
    if q1 == 0:
        return [u[0] * b for b in v]
    return [a * v[0] for a in u]


def _bidegree_product(A: Matrix, B: Matrix, p1, p2, q1, q2, G: Matrix) -> Matrix:
    """Product of a ``(p1, q1)`` and a ``(p2, q2)`` component.

    Rows index the ``S`` factor and columns the ``M`` factor, so the ``S``
    cup product acts on rows and ``_contract_M`` on columns.
    """
    if p1 == 2 and p2 == 2:
        # sum_{k,l} G_kl A_k (x) B_l = A^T G B, read as a single S-row
        W = A.T @ G @ B
        if q1 == 2 and q2 == 2:
            value = sum(W[k, l] * G[k, l] for k in range(RANK) for l in range(RANK) if G[k, l])
            return Matrix([[value]])
        if q1 == 0:
            return Matrix([list(W.row(0))], ncols=_dim(q2))
        return Matrix([list(W.column(0))], ncols=_dim(q1))
    if p1 == 0:
        x = A.row(0)
        rows = [_contract_M(x, B.row(s), q1, q2, G) for s in range(B.nrows)]
    else:
        y = B.row(0)
        rows = [_contract_M(A.row(s), y, q1, q2, G) for s in range(A.nrows)]
    return Matrix(rows, ncols=_dim(q1 + q2))


def pushforward_to_M(Z: KunnethKernel, q: int):
    """``pi_M*`` in degree ``q``: integrate the ``(4, q)`` component over ``S``."""
    return Z.component(4, q)


def correspondence(Z: KunnethKernel, gamma: Sequence) -> tuple:
    """``pi_M*(pi_S^* gamma . Z)`` for ``gamma`` in ``H^2(S)``, via the ring product."""
    prod = KunnethKernel.from_S(2, tuple(gamma)) * Z
    return tuple(pushforward_to_M(prod, 2)) if (4, 2) in prod.bidegrees() else (0,) * RANK


def induced_h2_map(Z: KunnethKernel) -> Matrix:
    """Matrix of ``H^2(S) -> H^2(M)`` induced by ``Z``: only the ``(2,2)`` part contributes."""
    G = _gram()
    return (G @ Z.matrix(2, 2)).T


def sqrt_todd_kernel() -> KunnethKernel:
    """``sqrt(td(S x M)) = (1 + [pt_S])(1 + [pt_M])``."""
    return KunnethKernel({(0, 0): 1, (4, 0): 1, (0, 4): 1, (4, 4): 1})


def kappa_two(C, alpha: Sequence, beta: Sequence, n: int) -> KunnethKernel:
    """``C - (pi_S^* alpha + pi_M^* beta)^2 / 2n`` as a degree-4 kernel."""
    if n <= 0:
        raise ValueError("rank n must be positive")
    C = C if isinstance(C, Matrix) else Matrix(C)
    if not C.is_integral():
        raise ValueError("C must be integral")
    alpha, beta = tuple(alpha), tuple(beta)
    G = _gram()
    # c1^2 has bidegree parts alpha^2, 2 alpha (x) beta and beta^2
    rows = [[n * c - a * b for c, b in zip(crow, beta)] for crow, a in zip(C.numerators, alpha)]
    return KunnethKernel({
        (2, 2): Matrix(rows, ncols=RANK) / n,
        (4, 0): Fraction(-dot(alpha, G @ alpha), 2 * n),
        (0, 4): Fraction(-dot(beta, G @ beta), 2 * n),
    })


def _check_primitive(v: Sequence, name: str) -> tuple:
    v = tuple(v)
    if len(v) != RANK or any(type(x) is not int for x in v):
        raise ValueError(f"{name} must be an integral {RANK}-tuple")
    if math.gcd(*v) != 1:
        raise ValueError(f"{name} must be primitive")
    return v


def sheaf_isometry_domain(n: int, k: int, j: int, x: Sequence, y: Sequence, C) -> QuotientStructure:
    """Structure of ``L / I_psi`` for the map induced by ``kappa_2`` with ``alpha = kx``, ``beta = jy``."""
    x = _check_primitive(x, "x")
    y = _check_primitive(y, "y")
    kappa = kappa_two(C, tuple(k * a for a in x), tuple(j * b for b in y), n)
    return QuotientStructure(integral_preimage_divisors(induced_h2_map(kappa)))


@dataclass(frozen=True)
class UniversalExampleReport:
    n: int
    s: int
    j: int
    k: int
    h: tuple
    h_hat: tuple
    c2_coefficient: int
    c1_squared_coefficient: int
    rank_part: Fraction
    degree_four_matches: bool
    image_of_h: tuple
    sends_h_to_h_hat: bool

    @property
    def verified(self) -> bool:
        return self.degree_four_matches and self.sends_h_to_h_hat and self.rank_part == self.n


def verify_universal_example(n: int, s: int, j: int = 1, sign: int = -1) -> UniversalExampleReport:
    """Expand ``ch(E^v) exp(-c1/n) sqrt(td)`` in degree 4 for the rank ``n`` model.

    The data are ``h = e1 + ns e2`` on ``S`` and ``h^ = f1 + ns f2`` on ``M``
    (both of square ``2ns``), ``c1(E^v) = -h - j h^`` and a ``c2`` whose
    Kunneth ``(2,2)`` part sends ``h`` to ``(1 + 2(n-1)sj) h^``.  Only that
    part matters for the induced map; ``c2`` carries nothing else.
    """
    if n <= 0 or s <= 0:
        raise ValueError("n and s must be positive")
    if math.gcd(n, s) != 1:
        raise ValueError("n and s must be coprime")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    k = pow(s, -1, n) if n > 1 else 1
    h = embed((1, n * s), 0, RANK)
    h_hat = embed((1, n * s), 2, RANK)
    c2_coeff = 1 + 2 * (n - 1) * s * j
    c1 = -KunnethKernel.from_S(2, h) - j * KunnethKernel.from_M(2, h_hat)
    c2 = KunnethKernel.pure_tensor(h, h_hat) * Fraction(c2_coeff, 2 * n * s)

    ch = (KunnethKernel({(0, 0): n}) + c1 + (c1 * c1) / 2 - c2).truncate(4)
    e = (KunnethKernel({(0, 0): 1}) - c1 / n + (c1 * c1) / (2 * n * n)).truncate(4)
    total = (ch * e * sqrt_todd_kernel()).truncate(4)

    c1sq = c1 * c1
    expected = (c1sq * Fraction(n - 1, 2 * n) - c2
                + KunnethKernel({(4, 0): n, (0, 4): n})).degree_part(4)
    degree_four = total.degree_part(4)
    psi = induced_h2_map(degree_four * sign)
    image = psi @ h
    c1sq_image = induced_h2_map(c1sq) @ h
    c1sq_coeff = c1sq_image[2]  # coefficient on f1, i.e. on h^
    check(tuple(c1sq_coeff * t for t in h_hat) == c1sq_image, "c1^2 image is not a multiple of h^")
    return UniversalExampleReport(
        n=n, s=s, j=j, k=k, h=h, h_hat=h_hat,
        c2_coefficient=c2_coeff,
        c1_squared_coefficient=c1sq_coeff,
        rank_part=total.component(0, 0),
        degree_four_matches=degree_four == expected,
        image_of_h=image,
        sends_h_to_h_hat=image == h_hat,
    )
