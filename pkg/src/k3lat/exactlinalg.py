"""Exact integer and rational matrix algebra.

Matrices are stored as integer numerators over one positive common
denominator, so that integral matrices never touch ``Fraction`` and rational
ones pay for a single gcd per operation instead of one per entry.

Conventions: vectors are tuples, a basis is a matrix whose *columns* are the
basis vectors, and a matrix acts on column vectors, ``v -> M v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Scalar = int | Fraction
Vector = tuple


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"unsupported entry type {type(x).__name__}")


def _simplify(x: Fraction | int) -> Scalar:
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``x*a + y*b == g == gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def content(v: Iterable[int]) -> int:
    """Gcd of the entries of an integer vector (0 for the zero vector)."""
    return math.gcd(*v)


def gcd_coefficients(v: Sequence[int]) -> tuple[int, list[int]]:
    """Return ``(g, c)`` with ``sum(c_i v_i) == g == gcd(v) >= 0``."""
    g, coeffs = 0, [0] * len(v)
    for i, vi in enumerate(v):
        if vi == 0:
            continue
        g, x, y = xgcd(g, vi)
        coeffs = [x * c for c in coeffs]
        coeffs[i] = y
    return g, coeffs


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v) if a)


class Matrix:
    """Immutable exact rational matrix.

    Args:
        rows: iterable of rows; entries may be ``int``, ``Fraction`` or
            strings such as ``"3/2"``.
        ncols: column count, needed only when ``rows`` is empty.
    """

    __slots__ = ("_num", "_den", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        rows = [list(r) for r in rows]
        nrows = len(rows)
        if nrows:
            width = len(rows[0])
            if any(len(r) != width for r in rows):
                raise ValueError("ragged rows")
            if ncols is not None and ncols != width:
                raise ValueError("ncols does not match row length")
            ncols = width
        elif ncols is None:
            ncols = 0
        if all(type(x) is int for r in rows for x in r):
            num, den = rows, 1
        else:
            fr = [[_as_fraction(x) for x in r] for r in rows]
            den = math.lcm(1, *(x.denominator for r in fr for x in r))
            num = [[x.numerator * (den // x.denominator) for x in r] for r in fr]
        self._set(num, den, nrows, ncols)

    def _set(self, num, den, nrows, ncols):
        if den != 1:
            g = math.gcd(den, *(x for r in num for x in r))
            if g != 1:
                num = [[x // g for x in r] for r in num]
                den //= g
        self._num = tuple(tuple(r) for r in num)
        self._den = den
        self.nrows = nrows
        self.ncols = ncols

    @classmethod
    def _raw(cls, num, den: int, nrows: int, ncols: int) -> "Matrix":
        m = cls.__new__(cls)
        if den < 0:
            num = [[-x for x in r] for r in num]
            den = -den
        m._set(num, den, nrows, ncols)
        return m

    # -- constructors --------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._raw([[int(i == j) for j in range(n)] for i in range(n)], 1, n, n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls._raw([[0] * ncols for _ in range(nrows)], 1, nrows, ncols)

    @classmethod
    def diagonal(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], ncols=n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int | None = None) -> "Matrix":
        columns = [list(c) for c in columns]
        if not columns:
            return cls.zeros(nrows or 0, 0)
        return cls(zip(*columns), ncols=len(columns))

    @classmethod
    def block_diagonal(cls, *blocks: "Matrix") -> "Matrix":
        n = sum(b.nrows for b in blocks)
        m = sum(b.ncols for b in blocks)
        rows = [[0] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.nrows):
                for j in range(b.ncols):
                    rows[r0 + i][c0 + j] = b[i, j]
            r0 += b.nrows
            c0 += b.ncols
        return cls(rows, ncols=m)

    # -- access --------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def den(self) -> int:
        """Common denominator (1 exactly when the matrix is integral)."""
        return self._den

    @property
    def numerators(self) -> tuple[tuple[int, ...], ...]:
        return self._num

    def is_integral(self) -> bool:
        return self._den == 1

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, key) -> Scalar:
        i, j = key
        x = self._num[i][j]
        if self._den == 1:
            return x
        return _simplify(Fraction(x, self._den))

    def row(self, i: int) -> Vector:
        if self._den == 1:
            return self._num[i]
        return tuple(_simplify(Fraction(x, self._den)) for x in self._num[i])

    def column(self, j: int) -> Vector:
        return tuple(self[i, j] for i in range(self.nrows))

    def rows(self) -> list[Vector]:
        return [self.row(i) for i in range(self.nrows)]

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.ncols)]

    def tolist(self) -> list[list[Scalar]]:
        return [list(r) for r in self.rows()]

    def diagonal_entries(self) -> Vector:
        return tuple(self[i, i] for i in range(min(self.shape)))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        num = [[self._num[i][j] for j in cols] for i in rows]
        return Matrix._raw(num, self._den, len(rows), len(cols))

    # -- arithmetic ----------------------------------------------------------

    @property
    def T(self) -> "Matrix":
        num = [list(c) for c in zip(*self._num)] if self.nrows else [[] for _ in range(self.ncols)]
        return Matrix._raw(num, self._den, self.ncols, self.nrows)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            width = other.ncols
            B = other._num
            out = []
            for r in self._num:
                acc = [0] * width
                for k, a in enumerate(r):
                    if a:
                        acc = [x + a * y for x, y in zip(acc, B[k])]
                out.append(acc)
            return Matrix._raw(out, self._den * other._den, self.nrows, width)
        v = tuple(other)
        if len(v) != self.ncols:
            raise ValueError("vector length does not match column count")
        if self._den == 1:
            return tuple(dot(r, v) for r in self._num)
        return tuple(_simplify(Fraction(dot(r, v)) / self._den) for r in self._num)

    def _combine(self, other: "Matrix", sign: int) -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        d = math.lcm(self._den, other._den)
        a, b = d // self._den, d // other._den
        num = [[a * x + sign * b * y for x, y in zip(r, s)] for r, s in zip(self._num, other._num)]
        return Matrix._raw(num, d, self.nrows, self.ncols)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return Matrix._raw([[-x for x in r] for r in self._num], self._den, self.nrows, self.ncols)

    def __mul__(self, scalar):
        if isinstance(scalar, Matrix):
            return NotImplemented
        s = _as_fraction(scalar)
        num = [[x * s.numerator for x in r] for r in self._num]
        return Matrix._raw(num, self._den * s.denominator, self.nrows, self.ncols)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1 / _as_fraction(scalar))

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self._den == other._den and self._num == other._num

    def __hash__(self):
        return hash((self._num, self._den, self.shape))

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.rows())
        return f"Matrix([{body}])"

    # -- elimination ---------------------------------------------------------

    def _echelon(self, augment=None):
        """Integer Gauss-Jordan on the numerators (rows kept primitive).

        Returns ``(rows, pivots)`` where rows are reduced so that each pivot
        column is zero outside its pivot row.
        """
        rows = [list(r) + (list(a) if augment else []) for r, a in
                zip(self._num, augment or [()] * self.nrows)]
        pivots = []
        r = 0
        for c in range(self.ncols):
            p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
            if p is None:
                continue
            rows[r], rows[p] = rows[p], rows[r]
            pr = rows[r]
            pv = pr[c]
            for i in range(len(rows)):
                if i != r and rows[i][c]:
                    a = rows[i][c]
                    new = [pv * x - a * y for x, y in zip(rows[i], pr)]
                    g = math.gcd(*new)
                    rows[i] = [x // g for x in new] if g > 1 else new
            pivots.append(c)
            r += 1
            if r == len(rows):
                break
        return rows, pivots

    def rank(self) -> int:
        return len(self._echelon()[1])

    def det(self) -> Scalar:
        if not self.is_square():
            raise ValueError("determinant of a non-square matrix")
        n = self.nrows
        if n == 0:
            return 1
        a = [list(r) for r in self._num]
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                p = next((i for i in range(k + 1, n) if a[i][k]), None)
                if p is None:
                    return 0
                a[k], a[p] = a[p], a[k]
                sign = -sign
            akk = a[k][k]
            for i in range(k + 1, n):
                aik = a[i][k]
                ri, rk = a[i], a[k]
                for j in range(k + 1, n):
                    ri[j] = (akk * ri[j] - aik * rk[j]) // prev
            prev = akk
        return _simplify(Fraction(sign * a[n - 1][n - 1], self._den ** n))

    def inverse(self) -> "Matrix":
        if not self.is_square():
            raise ValueError("inverse of a non-square matrix")
        n = self.nrows
        eye = [[int(i == j) for j in range(n)] for i in range(n)]
        rows, pivots = self._echelon(augment=eye)
        if len(pivots) < n:
            raise ZeroDivisionError("matrix is singular")
        out = [[Fraction(x * self._den, r[i]) for x in r[n:]] for i, r in enumerate(rows)]
        return Matrix(out, ncols=n)

    def solve(self, b: Sequence) -> Vector | None:
        """One rational solution of ``self @ x == b``, or ``None``."""
        bb = Matrix([[x] for x in b], ncols=1)
        if bb.nrows != self.nrows:
            raise ValueError("right-hand side has wrong length")
        scale = bb._den
        aug = [[x * self._den for x in r] for r in bb._num]
        sys = Matrix._raw([list(r) for r in self._num], 1, self.nrows, self.ncols)
        rows, pivots = sys._echelon(augment=aug)
        for r in rows[len(pivots):]:
            if r[-1]:
                return None
        x = [Fraction(0)] * self.ncols
        for i, c in enumerate(pivots):
            x[c] = Fraction(rows[i][-1], rows[i][c] * scale)
        return tuple(_simplify(v) for v in x)


# -- Smith normal form ------------------------------------------------------


@dataclass(frozen=True)
class SnfDecomposition:
    """``A == U @ D @ V`` with ``U``, ``V`` unimodular and ``D`` diagonal.

    ``U_inv`` and ``V_inv`` are the (integral) inverses, tracked during the
    elimination so callers never need a rational inverse.
    """

    U: Matrix
    D: Matrix
    V: Matrix
    U_inv: Matrix
    V_inv: Matrix

    @property
    def divisors(self) -> tuple[int, ...]:
        return self.D.diagonal_entries()

    @property
    def rank(self) -> int:
        return sum(1 for d in self.divisors if d)


def _require_integral(A: Matrix, what: str = "matrix"):
    if not isinstance(A, Matrix):
        A = Matrix(A)
    if not A.is_integral():
        raise ValueError(f"{what} must be integral")
    return A


def _snf(A: Matrix, track: bool):
    m, n = A.shape
    D = [list(r) for r in A.numerators]
    if track:
        P = [[int(i == j) for j in range(m)] for i in range(m)]
        Pi = [r[:] for r in P]
        Q = [[int(i == j) for j in range(n)] for i in range(n)]
        Qi = [r[:] for r in Q]

    def row_add(i, j, k):  # row_i += k * row_j
        D[i] = [x + k * y for x, y in zip(D[i], D[j])]
        if track:
            for r in P:
                r[j] -= k * r[i]
            Pi[i] = [x + k * y for x, y in zip(Pi[i], Pi[j])]

    def row_swap(i, j):
        D[i], D[j] = D[j], D[i]
        if track:
            for r in P:
                r[i], r[j] = r[j], r[i]
            Pi[i], Pi[j] = Pi[j], Pi[i]

    def row_neg(i):
        D[i] = [-x for x in D[i]]
        if track:
            for r in P:
                r[i] = -r[i]
            Pi[i] = [-x for x in Pi[i]]

    def col_add(i, j, k):  # col_i += k * col_j
        for r in D:
            r[i] += k * r[j]
        if track:
            Q[j] = [x - k * y for x, y in zip(Q[j], Q[i])]
            for r in Qi:
                r[i] += k * r[j]

    def col_swap(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        if track:
            Q[i], Q[j] = Q[j], Q[i]
            for r in Qi:
                r[i], r[j] = r[j], r[i]

    def quotient(a, p):
        q, r = divmod(a, p)
        return q + 1 if 2 * abs(r) > abs(p) else q  # r shares the sign of p

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            row = D[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        if i != t:
            row_swap(i, t)
        if j != t:
            col_swap(j, t)
        while True:
            p = D[t][t]
            clean = True
            for i in range(t + 1, m):
                if D[i][t]:
                    row_add(i, t, -quotient(D[i][t], p))
                    if D[i][t]:
                        clean = False
            for j in range(t + 1, n):
                if D[t][j]:
                    col_add(j, t, -quotient(D[t][j], p))
                    if D[t][j]:
                        clean = False
            if not clean:
                cands = [(abs(D[i][t]), i, t) for i in range(t + 1, m) if D[i][t]]
                cands += [(abs(D[t][j]), t, j) for j in range(t + 1, n) if D[t][j]]
                _, i, j = min(cands)
                if i != t:
                    row_swap(i, t)
                else:
                    col_swap(j, t)
                continue
            bad = next((i for i in range(t + 1, m)
                        if any(x % p for x in D[i][t + 1:])), None)
            if bad is None:
                break
            row_add(t, bad, 1)
        if D[t][t] < 0:
            row_neg(t)
    if not track:
        return tuple(D[i][i] for i in range(min(m, n)))
    mk = lambda rows, r, c: Matrix._raw(rows, 1, r, c)
    return SnfDecomposition(U=mk(P, m, m), D=mk(D, m, n), V=mk(Q, n, n),
                            U_inv=mk(Pi, m, m), V_inv=mk(Qi, n, n))


def smith_normal_form(A: Matrix) -> SnfDecomposition:
    """Smith normal form of an integer matrix.

    Examples:
        >>> smith_normal_form(Matrix([[2, 4], [6, 8]])).divisors
        (2, 4)
    """
    return _snf(_require_integral(A), track=True)


def smith_divisors(A: Matrix) -> tuple[int, ...]:
    """Diagonal of the Smith form, skipping the transform bookkeeping."""
    return _snf(_require_integral(A), track=False)


# -- Hermite normal form and lattices ---------------------------------------


def hermite_normal_form(A: Matrix) -> Matrix:
    """Column-style Hermite normal form of the lattice spanned by the columns.

    The result is in column echelon form with positive pivots; each entry
    in a pivot row to the left of the pivot lies in ``[0, pivot)``.  For a
    full-row-rank input the result is square lower-triangular.  Zero columns
    are dropped, so the column count equals the rank.
    """
    A = _require_integral(A)
    m = A.nrows
    cols = [list(c) for c in zip(*A.numerators)] if A.nrows else []
    k = 0
    for i in range(m):
        if k == len(cols):
            break
        for j in range(k + 1, len(cols)):
            b = cols[j][i]
            if not b:
                continue
            a = cols[k][i]
            g, x, y = xgcd(a, b)
            ca, cb = cols[k], cols[j]
            u, v = a // g, b // g
            cols[k] = [x * p + y * q for p, q in zip(ca, cb)]
            cols[j] = [u * q - v * p for p, q in zip(ca, cb)]
        p = cols[k][i]
        if p == 0:
            continue
        if p < 0:
            cols[k] = [-x for x in cols[k]]
            p = -p
        pc = cols[k]
        for c in range(k):
            q = cols[c][i] // p
            if q:
                cols[c] = [x - q * y for x, y in zip(cols[c], pc)]
        k += 1
    return Matrix.from_columns(cols[:k], nrows=m) if k else Matrix.zeros(m, 0)


def integer_kernel(A: Matrix) -> Matrix:
    """Basis (as columns) of ``{x in Z^n : A x = 0}``; saturated by construction."""
    snf = smith_normal_form(A)
    r = snf.rank
    n = A.ncols
    cols = [snf.V_inv.column(j) for j in range(r, n)]
    return hermite_normal_form(Matrix.from_columns(cols, nrows=n)) if cols else Matrix.zeros(n, 0)


def intersect_column_lattices(A: Matrix, B: Matrix) -> Matrix:
    """Basis of the intersection of the column lattices of ``A`` and ``B``.

    Both inputs must be integral with linearly independent columns.  The
    result is returned in Hermite normal form.
    """
    A = _require_integral(A, "A")
    B = _require_integral(B, "B")
    if A.nrows != B.nrows:
        raise ValueError("lattices live in different ambient ranks")
    if A.rank() < A.ncols or B.rank() < B.ncols:
        raise ValueError("rank-deficient basis")
    m = A.nrows
    stacked = Matrix([list(a) + [-x for x in b] for a, b in zip(A.numerators, B.numerators)],
                     ncols=A.ncols + B.ncols)
    K = integer_kernel(stacked)
    top = K.submatrix(range(A.ncols), range(K.ncols))
    if top.ncols == 0:
        return Matrix.zeros(m, 0)
    return hermite_normal_form(A @ top)


def dual_basis(B: Matrix, G: Matrix) -> Matrix:
    """Basis of ``M* = {x in M_Q : (x, m) in Z for all m in M}``.

    ``B`` holds a basis of ``M`` as columns and ``G`` is the ambient Gram
    matrix.  The returned columns pair with the columns of ``B`` to the
    identity matrix.
    """
    gram = B.T @ G @ B
    if gram.det() == 0:
        raise ValueError("sublattice is degenerate")
    return B @ gram.inverse()


def integral_preimage(M: Matrix) -> Matrix:
    """Basis of ``{v in Z^c : M v in Z^r}`` for a rational ``r x c`` matrix.

    Write ``M = N / d``.  If ``N = U S V`` is a Smith decomposition then the
    condition reads ``S V v in d Z^r``, which constrains each coordinate of
    ``V v`` separately.
    """
    d = M.den
    N = Matrix._raw([list(r) for r in M.numerators], 1, M.nrows, M.ncols)
    snf = smith_normal_form(N)
    divs = snf.divisors
    c = M.ncols
    scale = [d // math.gcd(divs[i], d) if i < len(divs) else 1 for i in range(c)]
    cols = [tuple(s * x for x in snf.V_inv.column(i)) for i, s in enumerate(scale)]
    return hermite_normal_form(Matrix.from_columns(cols, nrows=c))


def integral_preimage_divisors(M: Matrix) -> tuple[int, ...]:
    """Invariant factors of ``Z^c / integral_preimage(M)``, ascending.

    Only the fractional part of ``M`` matters, so the numerators are first
    reduced modulo the denominator.
    """
    d = M.den
    reduced = Matrix._raw([[x % d for x in r] for r in M.numerators], 1, M.nrows, M.ncols)
    divs = smith_divisors(reduced)
    c = M.ncols
    orders = [d // math.gcd(divs[i], d) if i < len(divs) else 1 for i in range(c)]
    return tuple(sorted(orders))


def lattice_contains(B: Matrix, v: Sequence) -> bool:
    """Whether ``v`` is an integral combination of the columns of ``B``."""
    x = B.solve(v)
    return x is not None and all(Fraction(t).denominator == 1 for t in x)
