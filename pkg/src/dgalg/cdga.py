"""Core representations: bigraded differential graded algebras and modules.

Objects are bigraded by (homological degree, weight).  A ``FiniteCdga`` stores
explicit bases, multiplication tensors and differential matrices for every
piece within its certified bounds; the constructor verifies d**2 = 0, the
Leibniz rule, Koszul commutativity and unitality exactly on basis elements.

Homological degree carries the Koszul sign rule; weight is a plain grading
preserved by every structure map.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import CutoffInsufficient, DgalgError, NoSolution
from .linalg import (
    Matrix,
    Vector,
    column_space_basis,
    in_span,
    kernel_basis,
    quotient_basis,
    rank,
    solve,
    vec,
    zero_vec,
)

Bidegree = tuple[int, int]
Terms = dict[Bidegree, Vector]

# When the full basis-triple associativity check would exceed this many
# products, a deterministic sample is checked instead.
_ASSOC_FULL_LIMIT = 120_000


# ---------------------------------------------------------------------------
# element helpers (elements are dicts piece -> coordinate vector)
# ---------------------------------------------------------------------------


def t_add(x: Terms, y: Terms) -> Terms:
    out = dict(x)
    for p, v in y.items():
        if p in out:
            s = tuple(a + b for a, b in zip(out[p], v))
            if all(c == 0 for c in s):
                del out[p]
            else:
                out[p] = s
        elif any(c != 0 for c in v):
            out[p] = v
    return out


def t_scale(c, x: Terms) -> Terms:
    c = Fraction(c)
    if c == 0:
        return {}
    return {p: tuple(c * a for a in v) for p, v in x.items()}


def t_sub(x: Terms, y: Terms) -> Terms:
    return t_add(x, t_scale(-1, y))


def t_is_zero(x: Terms) -> bool:
    return all(all(c == 0 for c in v) for v in x.values())


def t_single(p: Bidegree, v: Vector) -> Terms:
    return {p: v} if any(c != 0 for c in v) else {}


class GradedObject:
    """Shared bookkeeping for algebras and modules.

    ``basis`` maps a bidegree to its tuple of labels; absent pieces are zero.
    ``degree_bound`` / ``weight_bound`` delimit the region where the stored
    data is certified complete.
    """

    def __init__(self, basis, diff, degree_bound, weight_bound, name=""):
        self.basis = {p: tuple(ls) for p, ls in basis.items() if len(ls) > 0}
        self.diff = dict(diff)
        self.degree_bound = degree_bound
        self.weight_bound = weight_bound
        self.name = name
        for (d, w) in self.basis:
            if d < 0 or w < 0:
                raise ValueError("negative bidegree")
            if d > degree_bound or w > weight_bound:
                raise ValueError(f"piece {(d, w)} outside bounds")
        for p, m in self.diff.items():
            d, w = p
            if m.ncols != self.dim(p) or m.nrows != self.dim((d - 1, w)):
                raise ValueError(f"differential shape mismatch at {p}")

    def dim(self, p: Bidegree) -> int:
        b = self.basis.get(p)
        return 0 if b is None else len(b)

    def pieces(self) -> list[Bidegree]:
        return sorted(self.basis)

    def in_bounds(self, p: Bidegree) -> bool:
        d, w = p
        return 0 <= d <= self.degree_bound and 0 <= w <= self.weight_bound

    def total_dim(self) -> int:
        return sum(len(ls) for ls in self.basis.values())

    def d_mat(self, p: Bidegree) -> Matrix | None:
        m = self.diff.get(p)
        if m is not None:
            return m
        d, w = p
        if self.dim(p) == 0 or self.dim((d - 1, w)) == 0:
            return None
        return Matrix.zero(self.dim((d - 1, w)), self.dim(p))

    def d_elt(self, x: Terms) -> Terms:
        out: Terms = {}
        for p, v in x.items():
            m = self.d_mat(p)
            if m is not None:
                out = t_add(out, t_single((p[0] - 1, p[1]), m.apply(v)))
        return out

    def basis_elt(self, p: Bidegree, i: int) -> Terms:
        n = self.dim(p)
        v = tuple(Fraction(1 if j == i else 0) for j in range(n))
        return {p: v}

    def dims_table(self) -> dict[Bidegree, int]:
        return {p: len(ls) for p, ls in sorted(self.basis.items())}

    def _check_d_squared(self):
        for p in self.basis:
            d, w = p
            m1 = self.d_mat(p)
            if m1 is None:
                continue
            m2 = self.d_mat((d - 1, w))
            if m2 is not None and not m2.mul(m1).is_zero():
                raise DgalgError(f"d^2 != 0 at piece {p}")


class FiniteCdga(GradedObject):
    """Finite bigraded graded-commutative differential algebra over Q.

    ``mul[(p1, p2)]`` is a matrix taking the pair basis (i, j), flattened as
    ``i * dim(p2) + j``, to coordinates in the piece ``p1 + p2``.  Missing keys
    mean the zero product; products landing outside the bounds are dropped by
    ``mul_elt`` (callers must respect the certified window).
    """

    def __init__(
        self,
        basis,
        diff,
        mul,
        unit: Vector | None = None,
        *,
        degree_bound: int,
        weight_bound: int,
        aug: Matrix | None = None,
        check: bool = True,
        name: str = "",
    ):
        super().__init__(basis, diff, degree_bound, weight_bound, name)
        self.mul = dict(mul)
        if unit is None:
            if self.dim((0, 0)) != 1:
                raise ValueError("unit required unless piece (0,0) is a line")
            unit = (Fraction(1),)
        self.unit = vec(unit)
        if len(self.unit) != self.dim((0, 0)):
            raise ValueError("unit length mismatch")
        self.aug = aug
        for (p1, p2), m in self.mul.items():
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if m.ncols != self.dim(p1) * self.dim(p2) or m.nrows != self.dim(tgt):
                raise ValueError(f"multiplication shape mismatch at {(p1, p2)}")
        if check:
            self._check()

    # -- structure access --------------------------------------------

    def mul_mat(self, p1: Bidegree, p2: Bidegree) -> Matrix | None:
        m = self.mul.get((p1, p2))
        if m is not None:
            return m
        return None

    def unit_elt(self) -> Terms:
        return t_single((0, 0), self.unit)

    def mul_elt(self, x: Terms, y: Terms) -> Terms:
        out: Terms = {}
        for p1, v1 in x.items():
            for p2, v2 in y.items():
                tgt = (p1[0] + p2[0], p1[1] + p2[1])
                if not self.in_bounds(tgt):
                    continue
                m = self.mul_mat(p1, p2)
                if m is None:
                    continue
                d2 = self.dim(p2)
                pair = [Fraction(0)] * (self.dim(p1) * d2)
                for i, a in enumerate(v1):
                    if a == 0:
                        continue
                    for j, b in enumerate(v2):
                        if b != 0:
                            pair[i * d2 + j] = a * b
                out = t_add(out, t_single(tgt, m.apply(pair)))
        return out

    def basis_product(self, p1: Bidegree, i: int, p2: Bidegree, j: int) -> Terms:
        return self.mul_elt(self.basis_elt(p1, i), self.basis_elt(p2, j))

    def augmentation(self, x: Terms) -> Fraction:
        if self.aug is None:
            raise DgalgError("algebra has no augmentation")
        v = x.get((0, 0))
        if v is None:
            return Fraction(0)
        return self.aug.apply(v)[0]

    # -- invariant checks --------------------------------------------

    def _check(self):
        self._check_d_squared()
        self._check_unit()
        self._check_commutativity()
        self._check_leibniz()
        self._check_associativity()
        if self.aug is not None:
            self._check_augmentation()

    def _check_unit(self):
        u = self.unit_elt()
        for p in self.basis:
            for i in range(self.dim(p)):
                x = self.basis_elt(p, i)
                if t_sub(self.mul_elt(u, x), x):
                    raise DgalgError(f"unit fails on basis element {p}[{i}]")

    def _check_commutativity(self):
        for p1, p2 in itertools.product(self.pieces(), repeat=2):
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if not self.in_bounds(tgt):
                continue
            sign = -1 if (p1[0] % 2 and p2[0] % 2) else 1
            for i in range(self.dim(p1)):
                for j in range(self.dim(p2)):
                    lhs = self.basis_product(p1, i, p2, j)
                    rhs = t_scale(sign, self.basis_product(p2, j, p1, i))
                    if t_sub(lhs, rhs):
                        raise DgalgError(
                            f"commutativity fails at {p1}[{i}] * {p2}[{j}]"
                        )

    def _check_leibniz(self):
        for p1, p2 in itertools.product(self.pieces(), repeat=2):
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if not self.in_bounds(tgt) or tgt[0] == 0:
                continue
            sign = -1 if p1[0] % 2 else 1
            for i in range(self.dim(p1)):
                x = self.basis_elt(p1, i)
                dx = self.d_elt(x)
                for j in range(self.dim(p2)):
                    y = self.basis_elt(p2, j)
                    lhs = self.d_elt(self.basis_product(p1, i, p2, j))
                    rhs = t_add(
                        self.mul_elt(dx, y), t_scale(sign, self.mul_elt(x, self.d_elt(y)))
                    )
                    if t_sub(lhs, rhs):
                        raise DgalgError(f"Leibniz fails at {p1}[{i}] * {p2}[{j}]")

    def _check_associativity(self):
        triples = []
        for p1, p2, p3 in itertools.product(self.pieces(), repeat=3):
            tgt = (p1[0] + p2[0] + p3[0], p1[1] + p2[1] + p3[1])
            if not self.in_bounds(tgt):
                continue
            # also need both intermediate products in bounds
            if not self.in_bounds((p1[0] + p2[0], p1[1] + p2[1])):
                continue
            if not self.in_bounds((p2[0] + p3[0], p2[1] + p3[1])):
                continue
            triples.append((p1, p2, p3))
        count = sum(
            self.dim(p1) * self.dim(p2) * self.dim(p3) for p1, p2, p3 in triples
        )
        stride = max(1, count // _ASSOC_FULL_LIMIT + (1 if count > _ASSOC_FULL_LIMIT else 0))
        k = 0
        for p1, p2, p3 in triples:
            for i in range(self.dim(p1)):
                for j in range(self.dim(p2)):
                    for l in range(self.dim(p3)):
                        k += 1
                        if k % stride:
                            continue
                        xy = self.basis_product(p1, i, p2, j)
                        yz = self.basis_product(p2, j, p3, l)
                        lhs = self.mul_elt(xy, self.basis_elt(p3, l))
                        rhs = self.mul_elt(self.basis_elt(p1, i), yz)
                        if t_sub(lhs, rhs):
                            raise DgalgError(
                                f"associativity fails at {p1}[{i}],{p2}[{j}],{p3}[{l}]"
                            )

    def _check_augmentation(self):
        if self.aug.nrows != 1 or self.aug.ncols != self.dim((0, 0)):
            raise ValueError("augmentation shape mismatch")
        if self.augmentation(self.unit_elt()) != 1:
            raise DgalgError("augmentation does not send unit to 1")
        p = (0, 0)
        for i in range(self.dim(p)):
            for j in range(self.dim(p)):
                prod = self.basis_product(p, i, p, j)
                lhs = self.augmentation(prod)
                rhs = self.augmentation(self.basis_elt(p, i)) * self.augmentation(
                    self.basis_elt(p, j)
                )
                if lhs != rhs:
                    raise DgalgError("augmentation not multiplicative")
        d1 = self.d_mat((1, 0))
        if d1 is not None and not self.aug.mul(d1).is_zero():
            raise DgalgError("augmentation not a chain map")


class DgModule(GradedObject):
    """Bigraded dg module over a FiniteCdga.

    ``action[(pa, pm)]`` takes the flattened pair basis of an algebra piece
    and a module piece to the module piece ``pa + pm``.
    """

    def __init__(
        self,
        over: FiniteCdga,
        basis,
        diff,
        action,
        *,
        degree_bound: int,
        weight_bound: int,
        check: bool = True,
        name: str = "",
    ):
        super().__init__(basis, diff, degree_bound, weight_bound, name)
        self.over = over
        self.action = dict(action)
        for (pa, pm), m in self.action.items():
            tgt = (pa[0] + pm[0], pa[1] + pm[1])
            if m.ncols != over.dim(pa) * self.dim(pm) or m.nrows != self.dim(tgt):
                raise ValueError(f"action shape mismatch at {(pa, pm)}")
        if check:
            self._check()

    def act_mat(self, pa: Bidegree, pm: Bidegree) -> Matrix | None:
        return self.action.get((pa, pm))

    def act(self, a: Terms, x: Terms) -> Terms:
        out: Terms = {}
        for pa, va in a.items():
            for pm, vm in x.items():
                tgt = (pa[0] + pm[0], pa[1] + pm[1])
                if not self.in_bounds(tgt):
                    continue
                m = self.act_mat(pa, pm)
                if m is None:
                    continue
                dm = self.dim(pm)
                pair = [Fraction(0)] * (self.over.dim(pa) * dm)
                for i, c1 in enumerate(va):
                    if c1 == 0:
                        continue
                    for j, c2 in enumerate(vm):
                        if c2 != 0:
                            pair[i * dm + j] = c1 * c2
                out = t_add(out, t_single(tgt, m.apply(pair)))
        return out

    def _check(self):
        self._check_d_squared()
        A = self.over
        # unit acts as identity
        u = A.unit_elt()
        for p in self.basis:
            for i in range(self.dim(p)):
                x = self.basis_elt(p, i)
                if t_sub(self.act(u, x), x):
                    raise DgalgError(f"module unit fails at {p}[{i}]")
        # Leibniz: d(a x) = (da) x + (-1)^|a| a (dx)
        for pa in A.pieces():
            for pm in self.pieces():
                tgt = (pa[0] + pm[0], pa[1] + pm[1])
                if not self.in_bounds(tgt) or tgt[0] == 0:
                    continue
                sign = -1 if pa[0] % 2 else 1
                for i in range(A.dim(pa)):
                    a = A.basis_elt(pa, i)
                    da = A.d_elt(a)
                    for j in range(self.dim(pm)):
                        x = self.basis_elt(pm, j)
                        lhs = self.d_elt(self.act(a, x))
                        rhs = t_add(
                            self.act(da, x), t_scale(sign, self.act(a, self.d_elt(x)))
                        )
                        if t_sub(lhs, rhs):
                            raise DgalgError(
                                f"module Leibniz fails at {pa}[{i}] . {pm}[{j}]"
                            )
        # associativity (a b) x = a (b x), sampled like the algebra check
        triples = []
        for pa, pb in itertools.product(A.pieces(), repeat=2):
            pab = (pa[0] + pb[0], pa[1] + pb[1])
            if not A.in_bounds(pab):
                continue
            for pm in self.pieces():
                tgt = (pab[0] + pm[0], pab[1] + pm[1])
                if not self.in_bounds(tgt):
                    continue
                if not self.in_bounds((pb[0] + pm[0], pb[1] + pm[1])):
                    continue
                triples.append((pa, pb, pm))
        count = sum(A.dim(a) * A.dim(b) * self.dim(m) for a, b, m in triples)
        stride = max(1, count // _ASSOC_FULL_LIMIT + (1 if count > _ASSOC_FULL_LIMIT else 0))
        k = 0
        for pa, pb, pm in triples:
            for i in range(A.dim(pa)):
                for j in range(A.dim(pb)):
                    for l in range(self.dim(pm)):
                        k += 1
                        if k % stride:
                            continue
                        a = A.basis_elt(pa, i)
                        b = A.basis_elt(pb, j)
                        x = self.basis_elt(pm, l)
                        lhs = self.act(A.mul_elt(a, b), x)
                        rhs = self.act(a, self.act(b, x))
                        if t_sub(lhs, rhs):
                            raise DgalgError(
                                f"module associativity fails at {pa},{pb},{pm}"
                            )


# ---------------------------------------------------------------------------
# chain maps
# ---------------------------------------------------------------------------


class ChainMap:
    """Degree- and weight-preserving map of complexes commuting with d.

    ``blocks[p]`` is the matrix from the source piece to the target piece;
    missing blocks are zero.
    """

    def __init__(self, source, target, blocks, *, check: bool = True, name: str = ""):
        self.source = source
        self.target = target
        self.blocks = {p: m for p, m in blocks.items()}
        self.name = name
        for p, m in self.blocks.items():
            if m.ncols != source.dim(p) or m.nrows != target.dim(p):
                raise ValueError(f"chain map block shape mismatch at {p}")
        if check:
            self.check_chain()

    def certified_bounds(self) -> tuple[int, int]:
        return (
            min(self.source.degree_bound, self.target.degree_bound),
            min(self.source.weight_bound, self.target.weight_bound),
        )

    def block(self, p: Bidegree) -> Matrix:
        m = self.blocks.get(p)
        if m is not None:
            return m
        return Matrix.zero(self.target.dim(p), self.source.dim(p))

    def apply(self, x: Terms) -> Terms:
        out: Terms = {}
        for p, v in x.items():
            out = t_add(out, t_single(p, self.block(p).apply(v)))
        return out

    def compose(self, other: "ChainMap") -> "ChainMap":
        """self after other."""
        if other.target is not self.source:
            raise ValueError("composition mismatch")
        blocks = {}
        for p in other.source.basis:
            m = self.block(p).mul(other.block(p))
            if not m.is_zero():
                blocks[p] = m
        return ChainMap(other.source, self.target, blocks, check=False)

    def check_chain(self):
        db, wb = self.certified_bounds()
        for p in self.source.basis:
            d, w = p
            if d > db or w > wb or d == 0:
                continue
            lhs = self.block((d - 1, w)).mul(self.source.d_mat(p) or Matrix.zero(
                self.source.dim((d - 1, w)), self.source.dim(p)))
            rhs = (self.target.d_mat(p) or Matrix.zero(
                self.target.dim((d - 1, w)), self.target.dim(p))).mul(self.block(p))
            if lhs != rhs:
                raise DgalgError(f"map does not commute with d at {p}")

    def is_surjective(self) -> bool:
        db, wb = self.certified_bounds()
        for p in self.target.basis:
            if p[0] > db or p[1] > wb:
                continue
            if rank(self.block(p)) < self.target.dim(p):
                return False
        return True

    @staticmethod
    def identity(x) -> "ChainMap":
        return ChainMap(
            x, x, {p: Matrix.identity(x.dim(p)) for p in x.basis}, check=False
        )


class CdgaMorphism(ChainMap):
    """Chain map of algebras, additionally unital and multiplicative."""

    def __init__(self, source, target, blocks, *, check: bool = True, name: str = ""):
        super().__init__(source, target, blocks, check=check, name=name)
        if check:
            self.check_multiplicative()

    def check_multiplicative(self):
        A, B = self.source, self.target
        if t_sub(self.apply(A.unit_elt()), B.unit_elt()):
            raise DgalgError("morphism does not preserve the unit")
        db, wb = self.certified_bounds()
        for p1, p2 in itertools.product(A.pieces(), repeat=2):
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if tgt[0] > db or tgt[1] > wb:
                continue
            for i in range(A.dim(p1)):
                fx = self.apply(A.basis_elt(p1, i))
                for j in range(A.dim(p2)):
                    lhs = self.apply(A.basis_product(p1, i, p2, j))
                    rhs = B.mul_elt(fx, self.apply(A.basis_elt(p2, j)))
                    if t_sub(lhs, rhs):
                        raise DgalgError(
                            f"morphism not multiplicative at {p1}[{i}] * {p2}[{j}]"
                        )

    def compose(self, other: "ChainMap") -> "ChainMap":
        base = super().compose(other)
        if isinstance(other, CdgaMorphism):
            return CdgaMorphism(
                base.source, base.target, base.blocks, check=False
            )
        return base

    @staticmethod
    def identity(x) -> "CdgaMorphism":
        return CdgaMorphism(
            x, x, {p: Matrix.identity(x.dim(p)) for p in x.basis}, check=False
        )


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------


class Homology:
    """Per-piece homology of a GradedObject, with chosen representatives.

    Degrees are certified through ``certified_degree = degree_bound - 1``;
    asking beyond raises CutoffInsufficient.
    """

    def __init__(self, x: GradedObject):
        self.x = x
        self.certified_degree = x.degree_bound - 1
        self.weight_bound = x.weight_bound
        self._cache: dict[Bidegree, tuple[Matrix, Matrix, Matrix]] = {}

    def _piece(self, p: Bidegree):
        if p in self._cache:
            return self._cache[p]
        d, w = p
        n = self.x.dim(p)
        dm = self.x.d_mat(p)
        if dm is None:
            cycles = Matrix.identity(n)
        else:
            cycles = kernel_basis(dm)
        up = self.x.d_mat((d + 1, w))
        if up is None:
            bnd = Matrix.zero(n, 0)
        else:
            bnd = column_space_basis(up)
        # extend the boundary basis to the cycles by pivoting
        combined = bnd.hstack(cycles)
        cols = []
        current = bnd
        r = rank(current)
        for j in range(bnd.ncols, combined.ncols):
            cand = current.hstack(Matrix.from_columns(n, [combined.column(j)]))
            rc = rank(cand)
            if rc > r:
                cols.append(combined.column(j))
                current = cand
                r = rc
        reps = Matrix.from_columns(n, cols)
        self._cache[p] = (reps, bnd, bnd.hstack(reps))
        return self._cache[p]

    def require_certified(self, d: int, w: int = 0):
        if d > self.certified_degree or w > self.weight_bound:
            raise CutoffInsufficient(
                f"homology in degree {d}, weight {w} is beyond the certified "
                f"window (degree <= {self.certified_degree}, weight <= {self.weight_bound})"
            )

    def dim(self, d: int, w: int) -> int:
        self.require_certified(d, w)
        if self.x.dim((d, w)) == 0:
            return 0
        return self._piece((d, w))[0].ncols

    def dims_row(self, d: int) -> dict[int, int]:
        """Nonzero homology dimensions in degree d, keyed by weight."""
        out = {}
        for w in range(self.weight_bound + 1):
            n = self.dim(d, w)
            if n:
                out[w] = n
        return out

    def table(self, max_degree: int | None = None) -> dict[Bidegree, int]:
        top = self.certified_degree if max_degree is None else min(
            max_degree, self.certified_degree
        )
        out = {}
        for d in range(top + 1):
            for w, n in self.dims_row(d).items():
                out[(d, w)] = n
        return out

    def total_dim(self, d: int) -> int:
        return sum(self.dims_row(d).values())

    def rep(self, p: Bidegree, k: int) -> Vector:
        return self._piece(p)[0].column(k)

    def rep_elt(self, p: Bidegree, k: int) -> Terms:
        return t_single(p, self.rep(p, k))

    def reduce(self, p: Bidegree, v: Vector) -> Vector:
        """Coordinates of the class of the cycle v in the chosen H-basis."""
        reps, bnd, full = self._piece(p)
        if reps.ncols == 0:
            # still validate that v is a boundary (hence a cycle)
            if any(c != 0 for c in v):
                solve(full, v)
            return ()
        coords = solve(full, v)
        return tuple(coords[bnd.ncols :])

    def reduce_elt(self, x: Terms, d: int) -> dict[int, Vector]:
        """Classes of a homogeneous-degree element, keyed by weight."""
        out = {}
        for w in range(self.weight_bound + 1):
            v = x.get((d, w))
            if v is None:
                continue
            c = self.reduce((d, w), v)
            if any(a != 0 for a in c):
                out[w] = c
        return out

    def is_zero_through(self, top_degree: int) -> bool:
        return all(self.total_dim(d) == 0 for d in range(top_degree + 1))


def homology(x: GradedObject) -> Homology:
    return Homology(x)


def induced_on_homology(
    f: ChainMap, hs: Homology | None = None, ht: Homology | None = None
) -> dict[Bidegree, Matrix]:
    """Induced matrices on homology, per bidegree, through certified degrees."""
    hs = hs or Homology(f.source)
    ht = ht or Homology(f.target)
    top = min(hs.certified_degree, ht.certified_degree)
    wtop = min(hs.weight_bound, ht.weight_bound)
    out = {}
    for d in range(top + 1):
        for w in range(wtop + 1):
            ns = hs.dim(d, w)
            nt = ht.dim(d, w)
            if ns == 0 and nt == 0:
                continue
            cols = []
            for k in range(ns):
                img = f.apply(hs.rep_elt((d, w), k))
                v = img.get((d, w), zero_vec(f.target.dim((d, w))))
                cols.append(ht.reduce((d, w), v))
            out[(d, w)] = Matrix.from_columns(nt, cols)
    return out


def is_homology_iso(f: ChainMap, through_degree: int | None = None) -> bool:
    hs, ht = Homology(f.source), Homology(f.target)
    top = min(hs.certified_degree, ht.certified_degree)
    if through_degree is not None:
        top = min(top, through_degree)
    wtop = min(hs.weight_bound, ht.weight_bound)
    for d in range(top + 1):
        for w in range(wtop + 1):
            ns, nt = hs.dim(d, w), ht.dim(d, w)
            if ns != nt:
                return False
            if ns == 0:
                continue
            cols = []
            for k in range(ns):
                img = f.apply(hs.rep_elt((d, w), k))
                v = img.get((d, w), zero_vec(f.target.dim((d, w))))
                try:
                    cols.append(ht.reduce((d, w), v))
                except NoSolution:
                    return False
            if rank(Matrix.from_columns(nt, cols)) != nt:
                return False
    return True


# ---------------------------------------------------------------------------
# basic constructions
# ---------------------------------------------------------------------------


def q_algebra(degree_bound: int = 48, weight_bound: int = 48) -> FiniteCdga:
    """The ground field Q as a one-dimensional algebra in bidegree (0, 0)."""
    return FiniteCdga(
        {(0, 0): ("1",)},
        {},
        {((0, 0), (0, 0)): Matrix.identity(1)},
        (Fraction(1),),
        degree_bound=degree_bound,
        weight_bound=weight_bound,
        aug=Matrix.identity(1),
        check=False,
        name="Q",
    )


def q_module(
    dims: dict[Bidegree, int],
    diffs: dict[Bidegree, Matrix] | None = None,
    over: FiniteCdga | None = None,
    *,
    degree_bound: int | None = None,
    weight_bound: int | None = None,
    name: str = "",
) -> DgModule:
    """A module over Q (or a supplied Q-like base acting through its augmentation
    is *not* implied: the action is scalar, so ``over`` must be Q itself)."""
    over = over or q_algebra()
    basis = {
        p: tuple(f"m{p}_{i}" for i in range(n)) for p, n in dims.items() if n > 0
    }
    db = degree_bound if degree_bound is not None else over.degree_bound
    wb = weight_bound if weight_bound is not None else over.weight_bound
    action = {}
    for p in basis:
        n = len(basis[p])
        action[((0, 0), p)] = Matrix.identity(n)
    return DgModule(
        over,
        basis,
        diffs or {},
        action,
        degree_bound=db,
        weight_bound=wb,
        check=False,
        name=name,
    )


def algebra_as_module(a: FiniteCdga) -> DgModule:
    action = {}
    for p1, p2 in itertools.product(a.pieces(), repeat=2):
        m = a.mul_mat(p1, p2)
        if m is not None:
            action[(p1, p2)] = m
    return DgModule(
        a,
        a.basis,
        a.diff,
        action,
        degree_bound=a.degree_bound,
        weight_bound=a.weight_bound,
        check=False,
        name=a.name,
    )


def restrict_module(m: DgModule, f: CdgaMorphism) -> DgModule:
    """View a module over the target of f as a module over its source."""
    if f.target is not m.over:
        raise ValueError("restriction mismatch")
    action = {}
    for pa in f.source.pieces():
        blk = f.block(pa)
        for pm in m.pieces():
            tgt = (pa[0] + pm[0], pa[1] + pm[1])
            if not m.in_bounds(tgt):
                continue
            big = m.act_mat(pa, pm)
            if big is None:
                continue
            na, nm = f.source.dim(pa), m.dim(pm)
            cols = []
            for i in range(na):
                a_img = blk.column(i)
                for j in range(nm):
                    pair = [Fraction(0)] * (m.over.dim(pa) * nm)
                    for k, c in enumerate(a_img):
                        pair[k * nm + j] = c
                    cols.append(big.apply(pair))
            mat = Matrix.from_columns(m.dim(tgt), cols)
            if not mat.is_zero():
                action[(pa, pm)] = mat
    return DgModule(
        f.source,
        m.basis,
        m.diff,
        action,
        degree_bound=min(m.degree_bound, f.source.degree_bound),
        weight_bound=min(m.weight_bound, f.source.weight_bound),
        check=False,
        name=m.name,
    )


def shift(m: DgModule, n: int) -> DgModule:
    """M[n]: degrees raised by n; d and the action pick up the usual signs."""
    if n == 0:
        return m
    if n < 0:
        raise ValueError("only nonnegative shifts in the connective model")
    basis = {(d + n, w): ls for (d, w), ls in m.basis.items()}
    sgn_d = -1 if n % 2 else 1
    diff = {}
    for (d, w), mat in m.diff.items():
        diff[(d + n, w)] = mat.scale(sgn_d)
    action = {}
    for (pa, pm), mat in m.action.items():
        s = -1 if (n * pa[0]) % 2 else 1
        action[(pa, (pm[0] + n, pm[1]))] = mat.scale(s)
    return DgModule(
        m.over,
        basis,
        diff,
        action,
        degree_bound=min(m.degree_bound + n, m.over.degree_bound),
        weight_bound=m.weight_bound,
        check=False,
        name=f"{m.name}[{n}]" if m.name else "",
    )


def suspension(m: DgModule) -> DgModule:
    return shift(m, 1)


def loop(m: DgModule) -> DgModule:
    """Ω(M): the strict fiber of the path fibration over M at the zero point.

    Degreewise this is M shifted down, with the degree-0 piece cut to the
    cycles of M_1 so the result stays connective.
    """
    basis = {}
    diff = {}
    kernels = {}
    for w in range(m.weight_bound + 1):
        d1 = m.d_mat((1, w))
        n1 = m.dim((1, w))
        if n1 == 0:
            continue
        k = kernel_basis(d1) if d1 is not None else Matrix.identity(n1)
        kernels[w] = k
        if k.ncols:
            basis[(0, w)] = tuple(f"o{w}_{i}" for i in range(k.ncols))
    for (d, w), ls in m.basis.items():
        if d >= 2:
            basis[(d - 1, w)] = ls
    for (d, w) in m.basis:
        if d >= 3 and m.diff.get((d, w)) is not None:
            diff[(d - 1, w)] = m.diff[(d, w)].scale(-1)
    # degree 1 -> 0: factor -d_2 through the kernel basis
    for w, k in kernels.items():
        if k.ncols == 0:
            continue
        d2 = m.d_mat((2, w))
        if d2 is None or m.dim((2, w)) == 0:
            continue
        try:
            sol_cols = [solve(k, d2.scale(-1).column(j)) for j in range(d2.ncols)]
        except NoSolution as exc:  # pragma: no cover - would mean d^2 != 0
            raise DgalgError("loop construction: image not in cycles") from exc
        diff[(1, w)] = Matrix.from_columns(k.ncols, [c for c in sol_cols])
    action = {}
    # only the scalar (0,0)-action survives in general; degree-positive algebra
    # elements act through the shift, which we do not need downstream.
    for p in basis:
        n = len(basis[p])
        u = m.over.dim((0, 0))
        cols = []
        for i in range(u):
            for j in range(n):
                col = [Fraction(0)] * n
                if True:
                    # unit coordinates scale; non-unit degree-0 directions act
                    # as they do on M (weight 0 scalar base assumed)
                    pass
                col[j] = m.over.unit[i]
                cols.append(tuple(col))
        action[((0, 0), p)] = Matrix.from_columns(n, cols)
    return DgModule(
        m.over,
        basis,
        diff,
        action,
        degree_bound=m.degree_bound - 1,
        weight_bound=m.weight_bound,
        check=False,
        name=f"loop({m.name})" if m.name else "",
    )


def cone(f: ChainMap, *, check: bool = True) -> tuple[DgModule, ChainMap, ChainMap]:
    """Mapping cone of a module map f: M -> N over A.

    Returns (cone, inclusion N -> cone, connecting cone -> M[1]-as-complex
    realized as the projection onto the shifted part).
    """
    msrc, mtgt = f.source, f.target
    if not isinstance(msrc, DgModule) or not isinstance(mtgt, DgModule):
        raise ValueError("cone expects module maps")
    A = msrc.over
    db = min(msrc.degree_bound + 1, mtgt.degree_bound, A.degree_bound)
    wb = min(msrc.weight_bound, mtgt.weight_bound)
    basis = {}
    for d in range(db + 1):
        for w in range(wb + 1):
            nm = msrc.dim((d - 1, w)) if d >= 1 else 0
            nn = mtgt.dim((d, w))
            if nm + nn:
                basis[(d, w)] = tuple(
                    [f"s{l}" for l in (msrc.basis.get((d - 1, w)) or ())]
                    + list(mtgt.basis.get((d, w)) or ())
                )
    diff = {}
    for (d, w) in basis:
        if d == 0:
            continue
        nm = msrc.dim((d - 1, w))
        nn = mtgt.dim((d, w))
        rows_out = msrc.dim((d - 2, w)) if d >= 2 else 0
        cols_total = nm + nn
        rows_total = rows_out + mtgt.dim((d - 1, w))
        mat = Matrix.zero(rows_total, cols_total)
        dm = msrc.d_mat((d - 1, w))
        for j in range(nm):
            if dm is not None:
                col = dm.column(j)
                for i, c in enumerate(col):
                    mat.rows[i][j] = -c
            fv = f.block((d - 1, w)).column(j)
            for i, c in enumerate(fv):
                mat.rows[rows_out + i][j] = c
        dn = mtgt.d_mat((d, w))
        for j in range(nn):
            if dn is not None:
                col = dn.column(j)
                for i, c in enumerate(col):
                    mat.rows[rows_out + i][nm + j] = c
        if not mat.is_zero():
            diff[(d, w)] = mat
    action = {}
    for pa in A.pieces():
        sa = -1 if pa[0] % 2 else 1
        for (d, w) in basis:
            tgt = (pa[0] + d, pa[1] + w)
            if tgt not in basis or tgt[0] > db or tgt[1] > wb:
                continue
            nm = msrc.dim((d - 1, w))
            nn = mtgt.dim((d, w))
            tnm = msrc.dim((tgt[0] - 1, tgt[1]))
            tnn = mtgt.dim(tgt)
            na = A.dim(pa)
            mat = Matrix.zero(tnm + tnn, na * (nm + nn))
            am = msrc.act_mat(pa, (d - 1, w)) if nm else None
            an = mtgt.act_mat(pa, (d, w)) if nn else None
            for i in range(na):
                for j in range(nm):
                    if am is None:
                        continue
                    pair = [Fraction(0)] * (na * nm)
                    pair[i * nm + j] = Fraction(1)
                    col = am.apply(pair)
                    for r, c in enumerate(col):
                        mat.rows[r][i * (nm + nn) + j] = sa * c
                for j in range(nn):
                    if an is None:
                        continue
                    pair = [Fraction(0)] * (na * nn)
                    pair[i * nn + j] = Fraction(1)
                    col = an.apply(pair)
                    for r, c in enumerate(col):
                        mat.rows[tnm + r][i * (nm + nn) + nm + j] = c
            if not mat.is_zero():
                action[(pa, (d, w))] = mat
    c = DgModule(
        A, basis, diff, action, degree_bound=db, weight_bound=wb, check=check,
        name=f"cone({f.name})" if f.name else "cone",
    )
    incl_blocks = {}
    for (d, w) in mtgt.basis:
        if (d, w) not in basis:
            continue
        nm = msrc.dim((d - 1, w))
        nn = mtgt.dim((d, w))
        mat = Matrix.zero(nm + nn, nn)
        for j in range(nn):
            mat.rows[nm + j][j] = Fraction(1)
        incl_blocks[(d, w)] = mat
    incl = ChainMap(mtgt, c, incl_blocks, check=False)
    sm = shift(msrc, 1)
    proj_blocks = {}
    for (d, w) in basis:
        nm = msrc.dim((d - 1, w))
        nn = mtgt.dim((d, w))
        if nm == 0:
            continue
        mat = Matrix.zero(nm, nm + nn)
        for j in range(nm):
            mat.rows[j][j] = Fraction(1)
        proj_blocks[(d, w)] = mat
    proj = ChainMap(c, sm, proj_blocks, check=False)
    return c, incl, proj


def hocofib(f: ChainMap) -> DgModule:
    return cone(f, check=False)[0]


def hofib_complex(f: ChainMap) -> DgModule:
    """Homotopy fiber at 0 of a map of connective complexes (module output).

    Pieces: M_i ⊕ N_{i+1} for i >= 1, and at i = 0 the subspace
    {(m, y) : f(m) = d y}.  The action recorded is the scalar one; homology
    dimensions are the quantity consumed downstream.
    """
    msrc, mtgt = f.source, f.target
    db = min(msrc.degree_bound, mtgt.degree_bound - 1)
    wb = min(msrc.weight_bound, mtgt.weight_bound)
    basis = {}
    zero_piece_incl: dict[int, Matrix] = {}
    for w in range(wb + 1):
        # degree 0: kernel of (m, y) -> f(m) - dy into N_0
        nm = msrc.dim((0, w))
        nn = mtgt.dim((1, w))
        if nm + nn:
            mat = Matrix.zero(mtgt.dim((0, w)), nm + nn)
            fb = f.block((0, w))
            for j in range(nm):
                col = fb.column(j)
                for i, c in enumerate(col):
                    mat.rows[i][j] = c
            dn = mtgt.d_mat((1, w))
            for j in range(nn):
                if dn is not None:
                    col = dn.column(j)
                    for i, c in enumerate(col):
                        mat.rows[i][nm + j] = -c
            k = kernel_basis(mat)
            zero_piece_incl[w] = k
            if k.ncols:
                basis[(0, w)] = tuple(f"f0w{w}_{i}" for i in range(k.ncols))
    for d in range(1, db + 1):
        for w in range(wb + 1):
            nm = msrc.dim((d, w))
            nn = mtgt.dim((d + 1, w))
            if nm + nn:
                basis[(d, w)] = tuple(
                    list(msrc.basis.get((d, w)) or ())
                    + [f"s{l}" for l in (mtgt.basis.get((d + 1, w)) or ())]
                )
    diff = {}
    for (d, w) in basis:
        if d == 0:
            continue
        nm = msrc.dim((d, w))
        nn = mtgt.dim((d + 1, w))

        def full_diff_col(j):
            """d(m, y) = (dm, f(m) - dy) as a vector in M_{d-1} ⊕ N_d."""
            out_m = [Fraction(0)] * msrc.dim((d - 1, w))
            out_n = [Fraction(0)] * mtgt.dim((d, w))
            if j < nm:
                dm = msrc.d_mat((d, w))
                if dm is not None:
                    for i, c in enumerate(dm.column(j)):
                        out_m[i] = c
                for i, c in enumerate(f.block((d, w)).column(j)):
                    out_n[i] = c
            else:
                dn = mtgt.d_mat((d + 1, w))
                if dn is not None:
                    for i, c in enumerate(dn.column(j - nm)):
                        out_n[i] = -c
            return out_m, out_n

        if d >= 2:
            rows = msrc.dim((d - 1, w)) + mtgt.dim((d, w))
            mat = Matrix.zero(rows, nm + nn)
            for j in range(nm + nn):
                om, on = full_diff_col(j)
                for i, c in enumerate(om + on):
                    mat.rows[i][j] = c
            if not mat.is_zero():
                diff[(d, w)] = mat
        else:
            k = zero_piece_incl.get(w)
            kcols = 0 if k is None else k.ncols
            if kcols == 0:
                continue
            cols = []
            for j in range(nm + nn):
                om, on = full_diff_col(j)
                target_vec = tuple(om + on)
                cols.append(solve(k, target_vec))
            mat = Matrix.from_columns(kcols, cols)
            if not mat.is_zero():
                diff[(1, w)] = mat
    over = q_algebra()
    action = {((0, 0), p): Matrix.identity(len(ls)) for p, ls in basis.items()}
    fib = DgModule(
        over,
        basis,
        diff,
        action,
        degree_bound=db,
        weight_bound=wb,
        check=False,
        name=f"hofib({f.name})" if f.name else "hofib",
    )
    # coordinates of the degree-0 basis inside M_0 ⊕ N_1, for callers mapping
    # into the fiber
    fib._zero_incl = zero_piece_incl
    return fib


def underlying_complex(x: GradedObject) -> DgModule:
    """Forget all structure except the bigraded complex (module over Q)."""
    over = q_algebra()
    action = {((0, 0), p): Matrix.identity(len(ls)) for p, ls in x.basis.items()}
    return DgModule(
        over,
        x.basis,
        x.diff,
        action,
        degree_bound=x.degree_bound,
        weight_bound=x.weight_bound,
        check=False,
        name=x.name,
    )


def as_complex_map(f: ChainMap) -> ChainMap:
    return ChainMap(
        underlying_complex(f.source),
        underlying_complex(f.target),
        f.blocks,
        check=False,
        name=f.name,
    )


def hofib(f: ChainMap) -> DgModule:
    """Homotopy fiber at 0 on underlying complexes (algebra or module maps)."""
    return hofib_complex(as_complex_map(f))


# ---------------------------------------------------------------------------
# subalgebras and quotients
# ---------------------------------------------------------------------------


def sub_cdga(
    a: FiniteCdga,
    sub: dict[Bidegree, Matrix],
    *,
    check: bool = True,
    name: str = "",
) -> tuple[FiniteCdga, CdgaMorphism]:
    """The subalgebra spanned by the given per-piece column spans.

    The spans must contain the unit, be closed under d and multiplication
    (within bounds); coordinates of structure maps are obtained by exact
    solving, so failures surface as NoSolution.
    """
    cols = {p: m for p, m in sub.items() if m.ncols > 0}
    basis = {p: tuple(f"u{p}_{i}" for i in range(m.ncols)) for p, m in cols.items()}

    def coords(p: Bidegree, v: Vector) -> Vector:
        m = cols.get(p)
        if m is None or m.ncols == 0:
            if any(c != 0 for c in v):
                raise NoSolution(f"element at {p} outside the subalgebra")
            return ()
        return solve(m, v)

    diff = {}
    for p, m in cols.items():
        d, w = p
        dm = a.d_mat(p)
        if dm is None:
            continue
        out = Matrix.from_columns(
            len(basis.get((d - 1, w), ())),
            [coords((d - 1, w), dm.apply(m.column(j))) for j in range(m.ncols)],
        )
        if not out.is_zero():
            diff[p] = out
    mul = {}
    for p1, m1 in cols.items():
        for p2, m2 in cols.items():
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if not a.in_bounds(tgt):
                continue
            ncols_pair = m1.ncols * m2.ncols
            out_cols = []
            for i in range(m1.ncols):
                x = t_single(p1, m1.column(i))
                for j in range(m2.ncols):
                    y = t_single(p2, m2.column(j))
                    prod = a.mul_elt(x, y)
                    v = prod.get(tgt, zero_vec(a.dim(tgt)))
                    out_cols.append(coords(tgt, v))
            mat = Matrix.from_columns(len(basis.get(tgt, ())), out_cols)
            if not mat.is_zero():
                mul[(p1, p2)] = mat
    unit = coords((0, 0), a.unit)
    aug = None
    if a.aug is not None and (0, 0) in cols:
        aug = a.aug.mul(cols[(0, 0)])
    s = FiniteCdga(
        basis,
        diff,
        mul,
        unit,
        degree_bound=a.degree_bound,
        weight_bound=a.weight_bound,
        aug=aug,
        check=check,
        name=name or (f"sub({a.name})" if a.name else "sub"),
    )
    incl = CdgaMorphism(s, a, {p: m for p, m in cols.items()}, check=check)
    return s, incl


def quotient_cdga(
    a: FiniteCdga,
    ideal: dict[Bidegree, Matrix],
    *,
    check: bool = True,
    name: str = "",
) -> tuple[FiniteCdga, CdgaMorphism]:
    """Quotient by the dg ideal spanned per piece by the given columns."""
    spans = {p: m for p, m in ideal.items() if m.ncols > 0}
    if check:
        _check_is_dg_ideal(a, spans)
    proj = {}
    sect = {}
    basis = {}
    for p in a.basis:
        sub = spans.get(p, Matrix.zero(a.dim(p), 0))
        pr, se = quotient_basis(sub, a.dim(p))
        if pr.nrows:
            proj[p] = pr
            sect[p] = se
            basis[p] = tuple(f"q{p}_{i}" for i in range(pr.nrows))
    diff = {}
    for p in basis:
        d, w = p
        dm = a.d_mat(p)
        if dm is None or (d - 1, w) not in basis:
            continue
        out = proj[(d - 1, w)].mul(dm).mul(sect[p])
        if not out.is_zero():
            diff[p] = out
    mul = {}
    for p1 in basis:
        for p2 in basis:
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if tgt not in basis or not a.in_bounds(tgt):
                continue
            n1, n2 = len(basis[p1]), len(basis[p2])
            out_cols = []
            for i in range(n1):
                x = t_single(p1, sect[p1].column(i))
                for j in range(n2):
                    y = t_single(p2, sect[p2].column(j))
                    prod = a.mul_elt(x, y)
                    v = prod.get(tgt, zero_vec(a.dim(tgt)))
                    out_cols.append(proj[tgt].apply(v))
            mat = Matrix.from_columns(len(basis[tgt]), out_cols)
            if not mat.is_zero():
                mul[(p1, p2)] = mat
    unit = proj[(0, 0)].apply(a.unit) if (0, 0) in basis else None
    aug = None
    if a.aug is not None and (0, 0) in basis:
        # augmentation descends only if it kills the ideal
        sub0 = spans.get((0, 0))
        if sub0 is None or a.aug.mul(sub0).is_zero():
            aug = a.aug.mul(sect[(0, 0)])
    q = FiniteCdga(
        basis,
        diff,
        mul,
        unit,
        degree_bound=a.degree_bound,
        weight_bound=a.weight_bound,
        aug=aug,
        check=check,
        name=name or (f"quot({a.name})" if a.name else "quot"),
    )
    pmap = CdgaMorphism(a, q, {p: m for p, m in proj.items()}, check=check)
    return q, pmap


def _check_is_dg_ideal(a: FiniteCdga, spans: dict[Bidegree, Matrix]):
    for p, m in spans.items():
        d, w = p
        dm = a.d_mat(p)
        if dm is not None:
            down = spans.get((d - 1, w), Matrix.zero(a.dim((d - 1, w)), 0))
            for j in range(m.ncols):
                img = dm.apply(m.column(j))
                if any(c != 0 for c in img) and not in_span(down, img):
                    raise DgalgError(f"span not d-stable at {p}")
        for pa in a.pieces():
            tgt = (pa[0] + d, pa[1] + w)
            if not a.in_bounds(tgt):
                continue
            tspan = spans.get(tgt, Matrix.zero(a.dim(tgt), 0))
            for i in range(a.dim(pa)):
                x = a.basis_elt(pa, i)
                for j in range(m.ncols):
                    prod = a.mul_elt(x, t_single(p, m.column(j)))
                    v = prod.get(tgt)
                    if v is not None and any(c != 0 for c in v):
                        if not in_span(tspan, v):
                            raise DgalgError(f"span not an ideal at {pa} * {p}")


def truncate(a: FiniteCdga, n: int, *, check: bool = True) -> tuple[FiniteCdga, CdgaMorphism]:
    """τ≤n: quotient by everything above degree n plus boundaries in degree n."""
    if n + 1 > a.degree_bound:
        raise CutoffInsufficient(
            f"truncation at {n} needs degree data through {n + 1}, have {a.degree_bound}"
        )
    ideal = {}
    for p in a.basis:
        d, w = p
        if d > n:
            ideal[p] = Matrix.identity(a.dim(p))
        elif d == n:
            up = a.d_mat((n + 1, w))
            if up is not None:
                b = column_space_basis(up)
                if b.ncols:
                    ideal[p] = b
    return quotient_cdga(a, ideal, check=check, name=f"tau<={n}({a.name})" if a.name else f"tau<={n}")


def pi0(a: FiniteCdga, *, check: bool = True) -> FiniteCdga:
    """H_0 as a degree-0 algebra (an Artin base when finite-dimensional)."""
    h = Homology(a)
    weights = [w for w in range(a.weight_bound + 1) if h.dim(0, w) > 0]
    for w1 in weights:
        for w2 in weights:
            if w1 + w2 > a.weight_bound:
                raise CutoffInsufficient(
                    "pi0 products exceed the weight cutoff; raise the cutoff"
                )
    basis = {(0, w): tuple(f"h{w}_{i}" for i in range(h.dim(0, w))) for w in weights}
    mul = {}
    for w1 in weights:
        for w2 in weights:
            n1, n2 = h.dim(0, w1), h.dim(0, w2)
            tgt = (0, w1 + w2)
            tdim = len(basis.get(tgt, ()))
            out_cols = []
            for i in range(n1):
                x = h.rep_elt((0, w1), i)
                for j in range(n2):
                    y = h.rep_elt((0, w2), j)
                    prod = a.mul_elt(x, y)
                    v = prod.get((0, w1 + w2), zero_vec(a.dim((0, w1 + w2))))
                    out_cols.append(h.reduce((0, w1 + w2), v) if tdim else ())
            mat = Matrix.from_columns(tdim, out_cols)
            if not mat.is_zero():
                mul[((0, w1), (0, w2))] = mat
    unit = h.reduce((0, 0), a.unit)
    aug = None
    if a.aug is not None:
        reps = Matrix.from_columns(
            a.dim((0, 0)), [h.rep((0, 0), i) for i in range(h.dim(0, 0))]
        )
        aug = a.aug.mul(reps)
    return FiniteCdga(
        basis,
        {},
        mul,
        unit,
        degree_bound=a.degree_bound,
        weight_bound=a.weight_bound,
        aug=aug,
        check=check,
        name=f"pi0({a.name})" if a.name else "pi0",
    )



def artin_base(
    structure: list[list[list]],
    *,
    unit: Vector | None = None,
    weights: list[int] | None = None,
    aug: Vector | None = None,
    labels: list[str] | None = None,
    degree_bound: int = 48,
    weight_bound: int | None = None,
    name: str = "",
) -> FiniteCdga:
    """A discrete (degree-0) algebra from structure constants.

    ``structure[i][j]`` is the coordinate vector of e_i * e_j.  ``weights``
    assigns an internal weight to each basis element (default all 0); the
    structure constants must respect it.
    """
    n = len(structure)
    weights = weights or [0] * n
    labels = labels or [f"e{i}" for i in range(n)]
    by_weight: dict[int, list[int]] = {}
    for i, w in enumerate(weights):
        by_weight.setdefault(w, []).append(i)
    wmax = max(weights, default=0)
    wb = weight_bound if weight_bound is not None else max(2 * wmax, 8)
    basis = {(0, w): tuple(labels[i] for i in idx) for w, idx in by_weight.items()}
    index_in_piece = {}
    for w, idx in by_weight.items():
        for k, i in enumerate(idx):
            index_in_piece[i] = ((0, w), k)
    mul = {}
    for w1, idx1 in by_weight.items():
        for w2, idx2 in by_weight.items():
            tw = w1 + w2
            if tw > wb:
                continue
            tgt_idx = by_weight.get(tw, [])
            cols = []
            for i in idx1:
                for j in idx2:
                    full = [Fraction(x) for x in structure[i][j]]
                    for k, c in enumerate(full):
                        if c != 0 and weights[k] != tw:
                            raise DgalgError(
                                "structure constants do not respect the weights"
                            )
                    cols.append(tuple(full[k] for k in tgt_idx))
            mat = Matrix.from_columns(len(tgt_idx), cols)
            if not mat.is_zero():
                mul[((0, w1), (0, w2))] = mat
    if unit is None:
        u = zero_vec(n)
        u = tuple(Fraction(1 if i == 0 else 0) for i in range(n))
    else:
        u = vec(unit)
    unit_piece = tuple(u[i] for i in by_weight.get(0, []))
    if any(u[i] != 0 for w, idx in by_weight.items() if w != 0 for i in idx):
        raise DgalgError("unit must have weight 0")
    augm = None
    if aug is not None:
        augm = Matrix(1, len(by_weight.get(0, [])), [[aug[i] for i in by_weight.get(0, [])]])
        for w, idx in by_weight.items():
            if w != 0 and any(Fraction(aug[i]) != 0 for i in idx):
                raise DgalgError("augmentation must kill positive weights")
    return FiniteCdga(
        basis,
        {},
        mul,
        unit_piece,
        degree_bound=degree_bound,
        weight_bound=wb,
        aug=augm,
        name=name,
    )


def trivial_square_zero(
    b: FiniteCdga, m: DgModule, *, check: bool = True
) -> tuple[FiniteCdga, CdgaMorphism, CdgaMorphism]:
    """B ⊕ M with M squared to zero; returns (algebra, projection, zero section)."""
    if m.over is not b and not (b.total_dim() == 1 and m.over.total_dim() == 1):
        raise ValueError("module must be over the algebra")
    db = min(b.degree_bound, m.degree_bound)
    wb = min(b.weight_bound, m.weight_bound)
    basis = {}
    for d in range(db + 1):
        for w in range(wb + 1):
            nb, nm = b.dim((d, w)), m.dim((d, w))
            if nb + nm:
                basis[(d, w)] = tuple(
                    list(b.basis.get((d, w)) or ()) + [f"m_{l}" for l in (m.basis.get((d, w)) or ())]
                )
    diff = {}
    for p in basis:
        d, w = p
        if d == 0 or (d - 1, w) not in basis:
            continue
        nb, nm = b.dim(p), m.dim(p)
        tb, tm = b.dim((d - 1, w)), m.dim((d - 1, w))
        mat = Matrix.zero(tb + tm, nb + nm)
        dbm = b.d_mat(p)
        if dbm is not None:
            for j in range(nb):
                for i, c in enumerate(dbm.column(j)):
                    mat.rows[i][j] = c
        dmm = m.d_mat(p)
        if dmm is not None:
            for j in range(nm):
                for i, c in enumerate(dmm.column(j)):
                    mat.rows[tb + i][nb + j] = c
        if not mat.is_zero():
            diff[p] = mat
    mul = {}
    for p1 in basis:
        for p2 in basis:
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if tgt not in basis:
                if tgt[0] > db or tgt[1] > wb:
                    continue
                continue
            n1b, n1m = b.dim(p1), m.dim(p1)
            n2b, n2m = b.dim(p2), m.dim(p2)
            tb, tm = b.dim(tgt), m.dim(tgt)
            n1, n2 = n1b + n1m, n2b + n2m
            mat = Matrix.zero(tb + tm, n1 * n2)

            def put(col_index, bvec, mvec):
                for i, c in enumerate(bvec):
                    mat.rows[i][col_index] = c
                for i, c in enumerate(mvec):
                    mat.rows[tb + i][col_index] = c

            for i in range(n1):
                for j in range(n2):
                    ci = i * n2 + j
                    if i < n1b and j < n2b:
                        prod = b.basis_product(p1, i, p2, j)
                        v = prod.get(tgt, zero_vec(tb))
                        put(ci, v, zero_vec(tm))
                    elif i < n1b and j >= n2b:
                        x = b.basis_elt(p1, i)
                        y = m.basis_elt(p2, j - n2b)
                        v = m.act(x, y).get(tgt, zero_vec(tm))
                        put(ci, zero_vec(tb), v)
                    elif i >= n1b and j < n2b:
                        # m * b = (-1)^{|m||b|} b * m
                        sgn = -1 if (p1[0] % 2 and p2[0] % 2) else 1
                        x = b.basis_elt(p2, j)
                        y = m.basis_elt(p1, i - n1b)
                        v = m.act(x, y).get(tgt, zero_vec(tm))
                        put(ci, zero_vec(tb), tuple(sgn * c for c in v))
                    # m * m = 0
            if not mat.is_zero():
                mul[(p1, p2)] = mat
    unit = tuple(list(b.unit) + [Fraction(0)] * m.dim((0, 0)))
    aug = None
    if b.aug is not None:
        aug = Matrix(1, b.dim((0, 0)) + m.dim((0, 0)),
                     [list(b.aug.rows[0]) + [Fraction(0)] * m.dim((0, 0))])
    total = FiniteCdga(
        basis, diff, mul, unit, degree_bound=db, weight_bound=wb, aug=aug,
        check=check, name=f"{b.name}+{m.name}" if b.name else "trivial_ext",
    )
    # record the splitting so fibration replacements can recognize the shape
    total._split = ({p: b.dim(p) for p in basis}, m)
    proj_blocks = {}
    sect_blocks = {}
    for p in basis:
        nb, nm = b.dim(p), m.dim(p)
        if nb:
            pr = Matrix.zero(nb, nb + nm)
            for j in range(nb):
                pr.rows[j][j] = Fraction(1)
            proj_blocks[p] = pr
            se = Matrix.zero(nb + nm, nb)
            for j in range(nb):
                se.rows[j][j] = Fraction(1)
            sect_blocks[p] = se
    projection = CdgaMorphism(total, b, proj_blocks, check=check)
    zero_section = CdgaMorphism(b, total, sect_blocks, check=check)
    return total, projection, zero_section


def module_inclusion_into_trivial(total: FiniteCdga, b: FiniteCdga, m: DgModule) -> ChainMap:
    """The chain inclusion M -> B ⊕ M (for fiber comparisons)."""
    blocks = {}
    for p in m.basis:
        nb = b.dim(p)
        nm = m.dim(p)
        if p not in total.basis:
            continue
        mat = Matrix.zero(nb + nm, nm)
        for j in range(nm):
            mat.rows[nb + j][j] = Fraction(1)
        blocks[p] = mat
    return ChainMap(underlying_complex(m), underlying_complex(total), blocks, check=False)
