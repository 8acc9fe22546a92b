"""Exact rational linear algebra.

Dense matrices over Q (``fractions.Fraction``), with rank, kernels, solving
and quotient bookkeeping.  Everything is exact and deterministic: the pivot
convention is fixed (first nonzero entry scanning columns left to right,
rows top to bottom), so repeated runs produce identical bases.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NoSolution

Vector = tuple[Fraction, ...]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def vec(entries: Iterable) -> Vector:
    return tuple(_frac(x) for x in entries)


def zero_vec(n: int) -> Vector:
    return (Fraction(0),) * n


def unit_vec(n: int, i: int) -> Vector:
    return tuple(Fraction(1) if j == i else Fraction(0) for j in range(n))


def vadd(a: Vector, b: Vector) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vector, b: Vector) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c, a: Vector) -> Vector:
    c = _frac(c)
    return tuple(c * x for x in a)


def is_zero_vec(a: Vector) -> bool:
    return all(x == 0 for x in a)


class Matrix:
    """Dense exact matrix; rows-major storage, immutable by convention.

    A Matrix with shape (m, n) represents a linear map Q^n -> Q^m acting on
    column vectors via ``apply``.
    """

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[Sequence] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self.rows = [[Fraction(0)] * ncols for _ in range(nrows)]
        else:
            if len(rows) != nrows:
                raise ValueError("row count mismatch")
            self.rows = [[_frac(x) for x in r] for r in rows]
            for r in self.rows:
                if len(r) != ncols:
                    raise ValueError("column count mismatch")

    # -- constructors -------------------------------------------------

    @staticmethod
    def identity(n: int) -> "Matrix":
        m = Matrix(n, n)
        for i in range(n):
            m.rows[i][i] = Fraction(1)
        return m

    @staticmethod
    def zero(nrows: int, ncols: int) -> "Matrix":
        return Matrix(nrows, ncols)

    @staticmethod
    def from_columns(ncols_dim: int, columns: Sequence[Vector]) -> "Matrix":
        """Matrix whose columns are the given vectors of length ``ncols_dim``."""
        m = Matrix(ncols_dim, len(columns))
        for j, col in enumerate(columns):
            if len(col) != ncols_dim:
                raise ValueError("column length mismatch")
            for i, x in enumerate(col):
                m.rows[i][j] = _frac(x)
        return m

    # -- basic ops ----------------------------------------------------

    def copy(self) -> "Matrix":
        return Matrix(self.nrows, self.ncols, [list(r) for r in self.rows])

    def column(self, j: int) -> Vector:
        return tuple(self.rows[i][j] for i in range(self.nrows))

    def columns(self) -> list[Vector]:
        return [self.column(j) for j in range(self.ncols)]

    def apply(self, v: Sequence) -> Vector:
        if len(v) != self.ncols:
            raise ValueError("dimension mismatch in apply")
        return tuple(
            sum((self.rows[i][j] * _frac(v[j]) for j in range(self.ncols)), Fraction(0))
            for i in range(self.nrows)
        )

    def mul(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch in mul")
        out = Matrix(self.nrows, other.ncols)
        for i in range(self.nrows):
            ri = self.rows[i]
            oi = out.rows[i]
            for k in range(self.ncols):
                c = ri[k]
                if c == 0:
                    continue
                rk = other.rows[k]
                for j in range(other.ncols):
                    if rk[j] != 0:
                        oi[j] += c * rk[j]
        return out

    def add(self, other: "Matrix") -> "Matrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in add")
        return Matrix(
            self.nrows,
            self.ncols,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
        )

    def scale(self, c) -> "Matrix":
        c = _frac(c)
        return Matrix(self.nrows, self.ncols, [[c * x for x in r] for r in self.rows])

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.nrows != other.nrows:
            raise ValueError("row mismatch in hstack")
        return Matrix(
            self.nrows,
            self.ncols + other.ncols,
            [r1 + r2 for r1, r2 in zip(self.rows, other.rows)],
        )

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Matrix)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __repr__(self) -> str:
        return f"Matrix({self.nrows}x{self.ncols})"


# ---------------------------------------------------------------------------
# Elimination
# ---------------------------------------------------------------------------


def rank(m: Matrix) -> int:
    """Rank over Q via fraction-free Bareiss elimination on an integer copy."""
    if m.nrows == 0 or m.ncols == 0:
        return 0
    # Clear denominators row by row; row scaling does not change rank.
    a: list[list[int]] = []
    for r in m.rows:
        lcm = 1
        for x in r:
            if x.denominator != 1:
                g = _gcd(lcm, x.denominator)
                lcm = lcm // g * x.denominator
        a.append([int(x * lcm) for x in r])
    n_rows, n_cols = m.nrows, m.ncols
    piv_r = 0
    prev = 1
    for piv_c in range(n_cols):
        sel = None
        for i in range(piv_r, n_rows):
            if a[i][piv_c] != 0:
                sel = i
                break
        if sel is None:
            continue
        if sel != piv_r:
            a[piv_r], a[sel] = a[sel], a[piv_r]
        p = a[piv_r][piv_c]
        for i in range(piv_r + 1, n_rows):
            for j in range(piv_c + 1, n_cols):
                a[i][j] = (a[i][j] * p - a[i][piv_c] * a[piv_r][j]) // prev
            a[i][piv_c] = 0
        prev = p
        piv_r += 1
        if piv_r == n_rows:
            break
    return piv_r


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a if a >= 0 else -a


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form (exact) and the list of pivot columns."""
    a = [list(r) for r in m.rows]
    n_rows, n_cols = m.nrows, m.ncols
    pivots: list[int] = []
    piv_r = 0
    for piv_c in range(n_cols):
        sel = None
        for i in range(piv_r, n_rows):
            if a[i][piv_c] != 0:
                sel = i
                break
        if sel is None:
            continue
        if sel != piv_r:
            a[piv_r], a[sel] = a[sel], a[piv_r]
        p = a[piv_r][piv_c]
        a[piv_r] = [x / p for x in a[piv_r]]
        for i in range(n_rows):
            if i != piv_r and a[i][piv_c] != 0:
                c = a[i][piv_c]
                a[i] = [x - c * y for x, y in zip(a[i], a[piv_r])]
        pivots.append(piv_c)
        piv_r += 1
        if piv_r == n_rows:
            break
    return Matrix(n_rows, n_cols, a), pivots


def kernel_basis(m: Matrix) -> Matrix:
    """Columns span ker(m); exactly ``cols - rank`` independent columns."""
    r, pivots = rref(m)
    free = [j for j in range(m.ncols) if j not in pivots]
    cols: list[Vector] = []
    for f in free:
        v = [Fraction(0)] * m.ncols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -r.rows[i][f]
        cols.append(tuple(v))
    return Matrix.from_columns(m.ncols, cols)


def column_space_basis(m: Matrix) -> Matrix:
    """Columns of m at its pivot positions: a basis of the column space."""
    _, pivots = rref(m)
    return Matrix.from_columns(m.nrows, [m.column(j) for j in pivots])


def solve(m: Matrix, target: Sequence) -> Vector:
    """One exact solution of m x = target, or raise NoSolution."""
    target = vec(target)
    if len(target) != m.nrows:
        raise ValueError("target length mismatch")
    aug = m.hstack(Matrix.from_columns(m.nrows, [target]))
    r, pivots = rref(aug)
    if m.ncols in pivots:
        raise NoSolution("inconsistent linear system")
    x = [Fraction(0)] * m.ncols
    for i, p in enumerate(pivots):
        x[p] = r.rows[i][m.ncols]
    return tuple(x)


def solve_many(m: Matrix, targets: Matrix) -> Matrix:
    """Solve m X = targets column by column (raises NoSolution if any fails)."""
    cols = [solve(m, targets.column(j)) for j in range(targets.ncols)]
    return Matrix.from_columns(m.ncols, cols)


def quotient_basis(sub: Matrix, ambient_dim: int) -> tuple[Matrix, Matrix]:
    """Projection/section pair for the quotient of Q^ambient_dim by col(sub).

    Returns (projection, section) with projection: ambient -> quotient and
    section: quotient -> ambient, such that projection∘section = id and
    ker(projection) = column span of sub.  The section picks the non-pivot
    coordinate lines, so the basis convention is deterministic.
    """
    if sub.ncols == 0:
        return Matrix.identity(ambient_dim), Matrix.identity(ambient_dim)
    if sub.nrows != ambient_dim:
        raise ValueError("sub not in ambient space")
    r, pivots = rref(Matrix(sub.ncols, sub.nrows, [sub.column(j) for j in range(sub.ncols)]))
    # pivots index coordinates of the ambient space spanned "first" by sub.
    free = [j for j in range(ambient_dim) if j not in pivots]
    qdim = len(free)
    # Section: quotient basis element k -> coordinate line free[k].
    section = Matrix(ambient_dim, qdim)
    for k, f in enumerate(free):
        section.rows[f][k] = Fraction(1)
    # Projection: e_f -> its own class; e_pivot -> minus the free-coordinate
    # tail of the echelon row with that pivot.
    projection = Matrix(qdim, ambient_dim)
    for k, f in enumerate(free):
        projection.rows[k][f] = Fraction(1)
    for i, p in enumerate(pivots):
        for k, f in enumerate(free):
            projection.rows[k][p] = -r.rows[i][f]
    return projection, section


def in_span(columns: Matrix, v: Sequence) -> bool:
    try:
        solve(columns, v)
        return True
    except NoSolution:
        return False


def intersect_spans(a: Matrix, b: Matrix) -> Matrix:
    """Basis of col(a) ∩ col(b), as columns in the ambient space."""
    if a.nrows != b.nrows:
        raise ValueError("ambient mismatch")
    if a.ncols == 0 or b.ncols == 0:
        return Matrix(a.nrows, 0)
    stacked = a.hstack(b.scale(-1))
    k = kernel_basis(stacked)
    cols = []
    for j in range(k.ncols):
        coeffs = k.column(j)[: a.ncols]
        cols.append(a.apply(coeffs))
    span = Matrix.from_columns(a.nrows, cols)
    return column_space_basis(span)
