"""Semifree presentations: base algebra + free graded-commutative generators.

A presentation consists of a finite base ``FiniteCdga`` and an ordered list of
generators, each with a homological degree and weight; even-degree generators
are polynomial, odd-degree generators exterior.  The differential of each
generator is a polynomial in strictly earlier generators with base
coefficients (triangularity), lowers degree by one and preserves weight.

``evaluate`` realizes the presentation as a ``FiniteCdga`` within (degree,
weight) cutoffs; each bigraded piece is spanned by pairs (base basis element,
generator monomial), ordered by the fixed degree-lex convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .cdga import (
    Bidegree,
    CdgaMorphism,
    DgModule,
    FiniteCdga,
    Terms,
    t_add,
    t_scale,
    t_single,
    t_sub,
)
from .errors import DgalgError, InfinitePiece
from .linalg import Matrix, Vector, vec, zero_vec

# A monomial is a tuple of (generator index, exponent), sorted by index.
Monomial = tuple[tuple[int, int], ...]
# A polynomial maps monomials to base elements (Terms of the base algebra).
Poly = dict[Monomial, Terms]

ONE: Monomial = ()


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    weight: int

    @property
    def odd(self) -> bool:
        return self.degree % 2 == 1


class SemifreePresentation:
    def __init__(
        self,
        base: FiniteCdga,
        generators: list[Generator],
        dgens: list[Poly],
        *,
        check: bool = True,
        name: str = "",
    ):
        if len(generators) != len(dgens):
            raise ValueError("one differential polynomial per generator required")
        self.base = base
        self.gens = list(generators)
        self.dgens = [dict(p) for p in dgens]
        self.name = name
        if check:
            self._check()

    # -- bookkeeping --------------------------------------------------

    def mono_bidegree(self, mono: Monomial) -> Bidegree:
        d = sum(self.gens[i].degree * e for i, e in mono)
        w = sum(self.gens[i].weight * e for i, e in mono)
        return (d, w)

    def poly_bidegree_ok(self, p: Poly, expected: Bidegree) -> bool:
        for mono, terms in p.items():
            md, mw = self.mono_bidegree(mono)
            for (bd, bw) in terms:
                if (md + bd, mw + bw) != expected:
                    return False
        return True

    def _check(self):
        for k, (g, dp) in enumerate(zip(self.gens, self.dgens)):
            if g.degree < 0 or g.weight < 0:
                raise ValueError(f"generator {g.name}: negative bidegree")
            for mono, terms in dp.items():
                for i, _ in mono:
                    if i >= k:
                        raise DgalgError(
                            f"differential of {g.name} uses a non-earlier generator"
                        )
            if g.degree == 0 and dp:
                raise DgalgError(f"degree-0 generator {g.name} cannot have d != 0")
            if dp and not self.poly_bidegree_ok(dp, (g.degree - 1, g.weight)):
                raise DgalgError(f"differential of {g.name} has wrong bidegree")
        # d^2 = 0 on generators
        for k, dp in enumerate(self.dgens):
            if dp and not poly_is_zero(self.poly_d(dp)):
                raise DgalgError(f"d^2 != 0 on generator {self.gens[k].name}")

    def extended(self, new_gens: list[Generator], new_dgens: list[Poly], *, check: bool = True) -> "SemifreePresentation":
        return SemifreePresentation(
            self.base,
            self.gens + new_gens,
            self.dgens + new_dgens,
            check=check,
            name=self.name,
        )

    # -- polynomial arithmetic ---------------------------------------

    def mono_mul(self, m1: Monomial, m2: Monomial) -> tuple[int, Monomial] | None:
        """Product of normal-form monomials: (sign, merged) or None if zero."""
        if not m1:
            return (1, m2)
        if not m2:
            return (1, m1)
        odd1 = [i for i, _ in m1 if self.gens[i].odd]
        odd2 = [j for j, _ in m2 if self.gens[j].odd]
        if set(odd1) & set(odd2):
            return None
        inversions = sum(1 for i in odd1 for j in odd2 if i > j)
        sign = -1 if inversions % 2 else 1
        merged: dict[int, int] = {}
        for i, e in itertools.chain(m1, m2):
            merged[i] = merged.get(i, 0) + e
        mono = tuple(sorted(merged.items()))
        return (sign, mono)

    def poly_mul(self, p: Poly, q: Poly) -> Poly:
        out: Poly = {}
        for m1, b1 in p.items():
            d1 = self.mono_bidegree(m1)[0]
            for m2, b2 in q.items():
                prod = self.mono_mul(m1, m2)
                if prod is None:
                    continue
                sign, mono = prod
                for bp2, v2 in b2.items():
                    # move the base coefficient of the second factor past the
                    # first monomial
                    s = sign * (-1 if (d1 % 2 and bp2[0] % 2) else 1)
                    coeff = self.base.mul_elt(b1, t_single(bp2, v2))
                    if s == -1:
                        coeff = t_scale(-1, coeff)
                    if coeff:
                        _poly_add_term(out, mono, coeff)
        return _poly_clean(out)

    def poly_scale(self, c, p: Poly) -> Poly:
        return _poly_clean({m: t_scale(c, b) for m, b in p.items()})

    def poly_add(self, p: Poly, q: Poly) -> Poly:
        out = {m: dict(b) for m, b in p.items()}
        for m, b in q.items():
            _poly_add_term(out, m, b)
        return _poly_clean(out)

    def poly_sub(self, p: Poly, q: Poly) -> Poly:
        return self.poly_add(p, self.poly_scale(-1, q))

    def mono_d(self, mono: Monomial) -> Poly:
        """Leibniz differential of a monomial (base coefficient 1)."""
        out: Poly = {}
        sign = 1
        for pos, (i, e) in enumerate(mono):
            g = self.gens[i]
            if g.degree == 0:
                continue
            dg = self.dgens[i]
            if not dg:
                sign *= 1 if (g.degree * e) % 2 == 0 else -1
                continue
            prefix: Monomial = mono[:pos]
            # d hits one factor g; for even g: e * g^(e-1) dg, odd g: dg
            if g.odd:
                rest_this = ()
                coeff = Fraction(1)
            else:
                rest_this = ((i, e - 1),) if e > 1 else ()
                coeff = Fraction(e)
            suffix: Monomial = mono[pos + 1 :]
            term: Poly = {ONE: t_scale(sign * coeff, self.base.unit_elt())}
            term = self.poly_mul(term, _mono_poly(prefix, self.base))
            term = self.poly_mul(term, dg)
            term = self.poly_mul(term, _mono_poly(rest_this, self.base))
            term = self.poly_mul(term, _mono_poly(suffix, self.base))
            out = self.poly_add(out, term)
            sign *= 1 if (g.degree * e) % 2 == 0 else -1
        return out

    def poly_d(self, p: Poly) -> Poly:
        out: Poly = {}
        for mono, terms in p.items():
            # d(b . m) = (db) m + (-1)^{|b|} b d(m)
            for bp, v in terms.items():
                b = t_single(bp, v)
                db = self.base.d_elt(b)
                if db:
                    _poly_add_term(out, mono, db)
                sb = -1 if bp[0] % 2 else 1
                dm = self.mono_d(mono)
                for m2, b2 in dm.items():
                    coeff = self.base.mul_elt(b, b2)
                    if sb == -1:
                        coeff = t_scale(-1, coeff)
                    if coeff:
                        _poly_add_term(out, m2, coeff)
        return _poly_clean(out)

    def generator_poly(self, i: int) -> Poly:
        return {((i, 1),): self.base.unit_elt()}

    # -- evaluation ---------------------------------------------------

    def monomials_within(self, degree_cutoff: int, weight_cutoff: int) -> list[Monomial]:
        for g in self.gens:
            if g.degree == 0 and g.weight == 0:
                raise InfinitePiece(
                    f"generator {g.name} has degree 0 and weight 0: piece (0,0) "
                    "would be infinite-dimensional"
                )
        results: list[Monomial] = []

        def rec(idx: int, current: list[tuple[int, int]], d: int, w: int):
            if idx == len(self.gens):
                results.append(tuple(current))
                return
            g = self.gens[idx]
            rec(idx + 1, current, d, w)
            e = 1
            while True:
                nd, nw = d + e * g.degree, w + e * g.weight
                if nd > degree_cutoff or nw > weight_cutoff:
                    break
                current.append((idx, e))
                rec(idx + 1, current, nd, nw)
                current.pop()
                if g.odd:
                    break
                e += 1

        rec(0, [], 0, 0)
        return results

    def evaluate(
        self,
        degree_cutoff: int,
        weight_cutoff: int,
        *,
        check: bool = True,
        with_mul: bool = True,
        name: str = "",
    ) -> "EvaluatedAlgebra":
        return EvaluatedAlgebra(
            self, degree_cutoff, weight_cutoff, check=check, with_mul=with_mul, name=name
        )


def _mono_poly(mono: Monomial, base: FiniteCdga) -> Poly:
    return {mono: base.unit_elt()}


def _poly_add_term(out: Poly, mono: Monomial, terms: Terms):
    if mono in out:
        out[mono] = t_add(out[mono], terms)
    else:
        out[mono] = dict(terms)


def _poly_clean(p: Poly) -> Poly:
    return {m: b for m, b in p.items() if b and any(any(c != 0 for c in v) for v in b.values())}


def poly_is_zero(p: Poly) -> bool:
    return not _poly_clean(p)


def _mono_sort_key(pres: SemifreePresentation, mono: Monomial):
    d, w = pres.mono_bidegree(mono)
    expvec = tuple(-dict(mono).get(i, 0) for i in range(len(pres.gens)))
    return (d, w, len(mono), expvec)


class EvaluatedAlgebra(FiniteCdga):
    """A semifree presentation realized as finite data within cutoffs.

    Extra structure: ``index[piece]`` lists the basis as triples
    (base piece, base index, monomial); ``position`` inverts it.
    """

    def __init__(
        self,
        pres: SemifreePresentation,
        degree_cutoff: int,
        weight_cutoff: int,
        *,
        check: bool = True,
        with_mul: bool = True,
        name: str = "",
    ):
        if degree_cutoff > pres.base.degree_bound or weight_cutoff > pres.base.weight_bound:
            raise DgalgError(
                "evaluation cutoffs exceed the certified bounds of the base"
            )
        self.pres = pres
        monos = pres.monomials_within(degree_cutoff, weight_cutoff)
        monos.sort(key=lambda m: _mono_sort_key(pres, m))
        index: dict[Bidegree, list[tuple[Bidegree, int, Monomial]]] = {}
        for mono in monos:
            md, mw = pres.mono_bidegree(mono)
            for bp in sorted(pres.base.basis):
                d, w = md + bp[0], mw + bp[1]
                if d > degree_cutoff or w > weight_cutoff:
                    continue
                for bi in range(pres.base.dim(bp)):
                    index.setdefault((d, w), []).append((bp, bi, mono))
        # deterministic order: monomial key first, then base piece and index
        for p in index:
            index[p].sort(
                key=lambda t: (_mono_sort_key(pres, t[2]), t[0], t[1])
            )
        self.index = index
        self.position: dict[tuple[Bidegree, int, Monomial], tuple[Bidegree, int]] = {}
        for p, items in index.items():
            for k, tr in enumerate(items):
                self.position[tr] = (p, k)

        basis = {
            p: tuple(self._label(tr) for tr in items) for p, items in index.items()
        }
        diff = {}
        for p, items in index.items():
            d, w = p
            if d == 0 or (d - 1, w) not in index:
                continue
            cols = []
            for (bp, bi, mono) in items:
                poly = {mono: t_single(bp, _unit_vector(pres.base.dim(bp), bi))}
                dp = pres.poly_d(poly)
                cols.append(self._poly_vector(dp, (d - 1, w)))
            mat = Matrix.from_columns(len(index[(d - 1, w)]), cols)
            if not mat.is_zero():
                diff[p] = mat
        mul = {}
        items_pairs = index.items() if with_mul else {}.items()
        for p1, items1 in items_pairs:
            for p2, items2 in index.items():
                tgt = (p1[0] + p2[0], p1[1] + p2[1])
                if tgt[0] > degree_cutoff or tgt[1] > weight_cutoff:
                    continue
                tdim = len(index.get(tgt, ()))
                cols = []
                for (bp1, bi1, m1) in items1:
                    poly1 = {m1: t_single(bp1, _unit_vector(pres.base.dim(bp1), bi1))}
                    for (bp2, bi2, m2) in items2:
                        poly2 = {m2: t_single(bp2, _unit_vector(pres.base.dim(bp2), bi2))}
                        prod = pres.poly_mul(poly1, poly2)
                        cols.append(self._poly_vector(prod, tgt) if tdim else ())
                mat = Matrix.from_columns(tdim, cols)
                if not mat.is_zero():
                    mul[(p1, p2)] = mat
        unit = self._poly_vector({ONE: pres.base.unit_elt()}, (0, 0))
        aug = None
        if pres.base.aug is not None and (0, 0) in index:
            row = []
            for (bp, bi, mono) in index[(0, 0)]:
                if mono == ONE and bp == (0, 0):
                    row.append(pres.base.aug.rows[0][bi])
                else:
                    row.append(Fraction(0))
            aug = Matrix(1, len(row), [row])
        super().__init__(
            basis,
            diff,
            mul,
            unit,
            degree_bound=degree_cutoff,
            weight_bound=weight_cutoff,
            aug=aug,
            check=check,
            name=name or pres.name,
        )

    def _label(self, tr) -> str:
        bp, bi, mono = tr
        blabel = self.pres.base.basis[bp][bi]
        if not mono:
            return blabel
        parts = []
        for i, e in mono:
            g = self.pres.gens[i]
            parts.append(g.name if e == 1 else f"{g.name}^{e}")
        mstr = "*".join(parts)
        if bp == (0, 0) and blabel in ("1", "e0"):
            return mstr
        return f"{blabel}*{mstr}"

    def _poly_vector(self, p: Poly, piece: Bidegree) -> Vector:
        n = len(self.index.get(piece, ()))
        out = [Fraction(0)] * n
        for mono, terms in p.items():
            for bp, v in terms.items():
                for bi, c in enumerate(v):
                    if c == 0:
                        continue
                    pos = self.position.get((bp, bi, mono))
                    if pos is None:
                        continue
                    pp, k = pos
                    if pp != piece:
                        raise DgalgError("polynomial not homogeneous of expected bidegree")
                    out[k] += c
        return tuple(out)

    def poly_to_terms(self, p: Poly) -> Terms:
        out: Terms = {}
        by_piece: dict[Bidegree, dict] = {}
        for mono, terms in p.items():
            md, mw = self.pres.mono_bidegree(mono)
            for bp, v in terms.items():
                piece = (md + bp[0], mw + bp[1])
                by_piece.setdefault(piece, {})
        for piece in by_piece:
            sub = {
                m: {bp: v for bp, v in terms.items()
                    if (self.pres.mono_bidegree(m)[0] + bp[0],
                        self.pres.mono_bidegree(m)[1] + bp[1]) == piece}
                for m, terms in p.items()
            }
            sub = _poly_clean(sub)
            if sub:
                out = t_add(out, t_single(piece, self._poly_vector(sub, piece)))
        return out

    def terms_to_poly(self, x: Terms) -> Poly:
        out: Poly = {}
        for piece, v in x.items():
            items = self.index.get(piece, ())
            for k, c in enumerate(v):
                if c == 0:
                    continue
                bp, bi, mono = items[k]
                _poly_add_term(
                    out, mono, t_single(bp, _scaled_unit(self.pres.base.dim(bp), bi, c))
                )
        return _poly_clean(out)

    def generator_elt(self, i: int) -> Terms:
        """The i-th generator as an element of the evaluation."""
        return self.poly_to_terms(self.pres.generator_poly(i))

    def word_lengths(self, piece: Bidegree) -> list[int]:
        """Generator word length of each basis element of a piece."""
        return [sum(e for _, e in mono) for (_, _, mono) in self.index.get(piece, ())]

    def base_inclusion(self) -> CdgaMorphism:
        blocks = {}
        for bp in self.pres.base.basis:
            n = self.pres.base.dim(bp)
            cols = []
            for bi in range(n):
                pos = self.position.get((bp, bi, ONE))
                tgt_dim = len(self.index.get(bp, ()))
                col = [Fraction(0)] * tgt_dim
                if pos is not None:
                    col[pos[1]] = Fraction(1)
                cols.append(tuple(col))
            if cols:
                blocks[bp] = Matrix.from_columns(len(self.index.get(bp, ())), cols)
        return CdgaMorphism(self.pres.base, self, blocks, check=False)


def _unit_vector(n: int, i: int) -> Vector:
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


def _scaled_unit(n: int, i: int, c) -> Vector:
    return tuple(Fraction(c) if j == i else Fraction(0) for j in range(n))


# ---------------------------------------------------------------------------
# canonical maps out of evaluations
# ---------------------------------------------------------------------------


def morphism_from_images(
    ev: EvaluatedAlgebra,
    target: FiniteCdga,
    base_map: CdgaMorphism,
    images: list[Terms],
    *,
    check: bool = True,
    name: str = "",
) -> CdgaMorphism:
    """The algebra map sending each generator to the given target element.

    ``base_map`` carries base coefficients; generator monomials go to ordered
    products of the images (the Koszul bookkeeping is the target's).
    """
    if len(images) != len(ev.pres.gens):
        raise ValueError("one image per generator required")
    mono_cache: dict[Monomial, Terms] = {ONE: target.unit_elt()}

    def mono_image(mono: Monomial) -> Terms:
        if mono in mono_cache:
            return mono_cache[mono]
        # peel one factor to reuse cached prefixes
        (i, e) = mono[-1]
        prefix = mono[:-1] + (((i, e - 1),) if e > 1 else ())
        out = target.mul_elt(mono_image(prefix), images[i])
        mono_cache[mono] = out
        return out

    blocks = {}
    for p, items in ev.index.items():
        cols = []
        for (bp, bi, mono) in items:
            b_img = base_map.apply(ev.pres.base.basis_elt(bp, bi))
            full = target.mul_elt(b_img, mono_image(mono))
            cols.append(full.get(p, zero_vec(target.dim(p))))
        blocks[p] = Matrix.from_columns(target.dim(p), cols)
    return CdgaMorphism(ev, target, blocks, check=check, name=name)


def base_change(
    pres: SemifreePresentation, f: CdgaMorphism, *, check: bool = True, name: str = ""
) -> SemifreePresentation:
    """Transport a presentation along a base map A -> C (same generators)."""
    if f.source is not pres.base:
        raise ValueError("base map source mismatch")

    def map_poly(p: Poly) -> Poly:
        return _poly_clean({m: f.apply(b) for m, b in p.items()})

    return SemifreePresentation(
        f.target,
        list(pres.gens),
        [map_poly(p) for p in pres.dgens],
        check=check,
        name=name or pres.name,
    )


def evaluation_map(
    ev_src: EvaluatedAlgebra,
    ev_tgt: EvaluatedAlgebra,
    f: CdgaMorphism,
    *,
    check: bool = True,
    name: str = "",
) -> CdgaMorphism:
    """The strict map between evaluations induced by a base map (same gens)."""
    blocks = {}
    for p, items in ev_src.index.items():
        tdim = len(ev_tgt.index.get(p, ()))
        cols = []
        for (bp, bi, mono) in items:
            img = f.apply(ev_src.pres.base.basis_elt(bp, bi))
            poly = {mono: img}
            cols.append(ev_tgt._poly_vector(poly, p) if tdim else ())
        mat = Matrix.from_columns(tdim, cols)
        blocks[p] = mat
    return CdgaMorphism(ev_src, ev_tgt, blocks, check=check, name=name)


# ---------------------------------------------------------------------------
# Sym over Q
# ---------------------------------------------------------------------------


def sym_presentation(m: DgModule, *, name: str = "") -> SemifreePresentation:
    """Free graded-commutative algebra on a complex over Q, as a presentation."""
    base = m.over
    if base.total_dim() != 1:
        raise DgalgError("sym_presentation expects a module over Q")
    gens = []
    positions = []
    for p in sorted(m.basis):
        for i in range(m.dim(p)):
            gens.append(Generator(f"x{p[0]}w{p[1]}_{i}", p[0], p[1]))
            positions.append((p, i))
    gen_of = {pos: k for k, pos in enumerate(positions)}
    dgens: list[Poly] = []
    for k, (p, i) in enumerate(positions):
        dm = m.d_mat(p)
        poly: Poly = {}
        if dm is not None and p[0] >= 1:
            col = dm.column(i)
            for j, c in enumerate(col):
                if c != 0:
                    idx = gen_of[((p[0] - 1, p[1]), j)]
                    _poly_add_term(
                        poly, ((idx, 1),), t_scale(c, base.unit_elt())
                    )
        dgens.append(poly)
    # triangularity: generators must be ordered so d refers to earlier ones;
    # sorting by (degree, weight) guarantees it since d lowers degree.
    order = sorted(range(len(gens)), key=lambda k: (gens[k].degree, gens[k].weight, k))
    rank_of = {k: r for r, k in enumerate(order)}
    new_gens = [gens[k] for k in order]
    new_dgens: list[Poly] = []
    for k in order:
        poly = dgens[k]
        renamed: Poly = {}
        for mono, b in poly.items():
            new_mono = tuple(sorted(((rank_of[i], e) for i, e in mono)))
            renamed[new_mono] = b
        new_dgens.append(renamed)
    return SemifreePresentation(m.over, new_gens, new_dgens, name=name or f"Sym({m.name})")


def sym(m: DgModule, degree_cutoff: int, weight_cutoff: int, *, check: bool = True) -> EvaluatedAlgebra:
    return sym_presentation(m).evaluate(degree_cutoff, weight_cutoff, check=check)


def sym_power_complex(ev: EvaluatedAlgebra, p: int) -> DgModule:
    """The word-length-p subcomplex of a Sym evaluation (over Q)."""
    from .cdga import q_algebra

    basis = {}
    sel: dict[Bidegree, list[int]] = {}
    for piece, items in ev.index.items():
        lens = ev.word_lengths(piece)
        idxs = [k for k, l in enumerate(lens) if l == p]
        if idxs:
            sel[piece] = idxs
            basis[piece] = tuple(ev.basis[piece][k] for k in idxs)
    diff = {}
    for piece, idxs in sel.items():
        d, w = piece
        down = sel.get((d - 1, w))
        if down is None or d == 0:
            continue
        dm = ev.d_mat(piece)
        if dm is None:
            continue
        mat = Matrix.zero(len(down), len(idxs))
        for cj, j in enumerate(idxs):
            col = dm.column(j)
            for ri, i in enumerate(down):
                mat.rows[ri][cj] = col[i]
            # entries of the column off the selected rows must vanish (d
            # preserves word length); verify
            for i, c in enumerate(col):
                if c != 0 and i not in down:
                    raise DgalgError("differential does not preserve word length")
        if not mat.is_zero():
            diff[piece] = mat
    over = q_algebra()
    action = {((0, 0), piece): Matrix.identity(len(ls)) for piece, ls in basis.items()}
    return DgModule(
        over,
        basis,
        diff,
        action,
        degree_bound=ev.degree_bound,
        weight_bound=ev.weight_bound,
        check=False,
        name=f"Sym^{p}",
    )
