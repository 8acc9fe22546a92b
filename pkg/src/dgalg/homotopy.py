"""Resolutions and homotopy (co)limits.

Semifree (Tate) replacement of an algebra map, semifree module resolutions,
derived tensor products, pushouts, homotopy pullbacks via a path-object
fibration replacement, homotopy fibers/cofibers, lifting, and connectivity
reports.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

from .cdga import (
    Bidegree,
    CdgaMorphism,
    ChainMap,
    DgModule,
    FiniteCdga,
    GradedObject,
    Homology,
    Terms,
    hofib,
    q_algebra,
    sub_cdga,
    t_add,
    t_scale,
    t_single,
)
from .errors import (
    CutoffInsufficient,
    DgalgError,
    NoSolution,
    UnsupportedDiagram,
)
from .linalg import (
    Matrix,
    Vector,
    column_space_basis,
    kernel_basis,
    rank,
    solve,
    vec,
    zero_vec,
)
from .semifree import (
    EvaluatedAlgebra,
    Generator,
    Poly,
    SemifreePresentation,
    base_change,
    evaluation_map,
    morphism_from_images,
)

_MAX_PASSES = 40


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise TimeoutError("resolution exceeded the caller-supplied deadline")


# ---------------------------------------------------------------------------
# semifree replacement of an algebra map (Tate / killing cycles)
# ---------------------------------------------------------------------------


@dataclass
class SemifreeReplacement:
    presentation: SemifreePresentation
    algebra: EvaluatedAlgebra
    quasi_iso: CdgaMorphism  # algebra -> target
    base_map: CdgaMorphism  # base -> target
    gen_images: list[Terms]
    certified_degree: int

    @property
    def base(self) -> FiniteCdga:
        return self.presentation.base


def semifree_replacement(
    f: CdgaMorphism,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    start: tuple[list[Generator], list, list[Terms]] | None = None,
    deadline: float | None = None,
    name: str = "",
) -> SemifreeReplacement:
    """Factor f: A -> B as A -> R -> B with R semifree and R -> B a
    homology iso through degree_cutoff - 1.

    Generators are adjoined degree by degree: first to surject onto homology
    (one generator per missed class, lowest weight first), then to kill
    kernel classes (one degree-(k+1) generator per kernel class).

    ``start`` seeds the presentation with (generators, dgens, images in B);
    the seeded generators remain a prefix of the result.
    """
    a, b = f.source, f.target
    if degree_cutoff > b.degree_bound or weight_cutoff > b.weight_bound:
        raise CutoffInsufficient("target data does not cover the requested cutoffs")
    if degree_cutoff > a.degree_bound or weight_cutoff > a.weight_bound:
        raise CutoffInsufficient("base data does not cover the requested cutoffs")
    if start is None:
        pres = SemifreePresentation(a, [], [], check=False, name=name)
        images = []
    else:
        s_gens, s_dgens, s_images = start
        pres = SemifreePresentation(a, list(s_gens), list(s_dgens), check=False, name=name)
        images = list(s_images)
    hb = Homology(b)
    cert = degree_cutoff - 1
    gen_count = len(pres.gens)
    for k in range(cert + 1):
        for _pass in range(_MAX_PASSES):
            _check_deadline(deadline)
            ev = pres.evaluate(degree_cutoff, weight_cutoff, check=False, with_mul=False)
            rho = morphism_from_images(ev, b, f, images, check=False)
            hr = Homology(ev)
            added = False
            # surjectivity defects, lowest weight first
            for w in range(weight_cutoff + 1):
                nt = hb.dim(k, w)
                if nt == 0:
                    continue
                ns = hr.dim(k, w)
                cols = []
                for i in range(ns):
                    img = rho.apply(hr.rep_elt((k, w), i))
                    cols.append(hb.reduce((k, w), img.get((k, w), zero_vec(b.dim((k, w))))))
                image_mat = Matrix.from_columns(nt, cols)
                hit = column_space_basis(image_mat)
                for j in range(nt):
                    target_class = tuple(
                        Fraction(1 if i == j else 0) for i in range(nt)
                    )
                    cand = hit.hstack(Matrix.from_columns(nt, [target_class]))
                    if rank(cand) == hit.ncols:
                        continue
                    hit = cand
                    if k == 0 and w == 0:
                        raise DgalgError(
                            "target not connected to the base in weight 0"
                        )
                    g = Generator(f"g{gen_count}", k, w)
                    gen_count += 1
                    pres = pres.extended([g], [{}], check=False)
                    images = images + [t_single((k, w), hb.rep((k, w), j))]
                    added = True
                if added:
                    # re-evaluate before scanning higher weights: products of
                    # the new generator may already hit the remaining classes
                    break
            if added:
                continue
            # injectivity defects
            for w in range(weight_cutoff + 1):
                ns = hr.dim(k, w)
                if ns == 0:
                    continue
                nt = hb.dim(k, w)
                cols = []
                for i in range(ns):
                    img = rho.apply(hr.rep_elt((k, w), i))
                    cols.append(hb.reduce((k, w), img.get((k, w), zero_vec(b.dim((k, w))))))
                mat = Matrix.from_columns(nt, cols)
                ker = kernel_basis(mat)
                for j in range(ker.ncols):
                    coeffs = ker.column(j)
                    z: Terms = {}
                    for i, c in enumerate(coeffs):
                        if c != 0:
                            z = t_add(z, t_scale(c, hr.rep_elt((k, w), i)))
                    # rho(z) is a boundary: find a primitive
                    img = rho.apply(z)
                    v = img.get((k, w), zero_vec(b.dim((k, w))))
                    dmat = b.d_mat((k + 1, w))
                    if dmat is None:
                        if any(c != 0 for c in v):
                            raise DgalgError("kernel class not a boundary in target")
                        m_val: Terms = {}
                    else:
                        m_val = t_single((k + 1, w), solve(dmat, v))
                    if k + 1 > degree_cutoff:
                        break
                    g = Generator(f"g{gen_count}", k + 1, w)
                    gen_count += 1
                    zpoly = ev.terms_to_poly(z)
                    pres = pres.extended([g], [zpoly], check=False)
                    images = images + [m_val]
                    added = True
                if added:
                    break
            if not added:
                break
        else:
            raise DgalgError(f"replacement did not stabilize in degree {k}")
    ev = pres.evaluate(degree_cutoff, weight_cutoff, check=False)
    rho = morphism_from_images(ev, b, f, images, check=False, name="rho")
    # certification: homology isomorphism through cert
    hr = Homology(ev)
    for k in range(cert + 1):
        for w in range(weight_cutoff + 1):
            ns, nt = hr.dim(k, w), hb.dim(k, w)
            if ns != nt:
                raise DgalgError(
                    f"replacement failed to certify at degree {k}, weight {w}"
                )
            if ns == 0:
                continue
            cols = []
            for i in range(ns):
                img = rho.apply(hr.rep_elt((k, w), i))
                cols.append(hb.reduce((k, w), img.get((k, w), zero_vec(b.dim((k, w))))))
            if rank(Matrix.from_columns(nt, cols)) != nt:
                raise DgalgError(
                    f"replacement not a homology iso at degree {k}, weight {w}"
                )
    return SemifreeReplacement(pres, ev, rho, f, images, cert)


def unit_morphism(b: FiniteCdga) -> CdgaMorphism:
    """The structure map Q -> B."""
    base = q_algebra(b.degree_bound, b.weight_bound)
    blocks = {(0, 0): Matrix.from_columns(b.dim((0, 0)), [b.unit])}
    return CdgaMorphism(base, b, blocks, check=False)


def resolve_algebra(
    b: FiniteCdga,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    deadline: float | None = None,
) -> SemifreeReplacement:
    """Semifree replacement of B over Q."""
    return semifree_replacement(
        unit_morphism(b), degree_cutoff, weight_cutoff, deadline=deadline
    )


# ---------------------------------------------------------------------------
# free module presentations and resolutions
# ---------------------------------------------------------------------------

ModElt = dict[int, Terms]  # generator index -> base coefficient


@dataclass
class FreeModulePresentation:
    """Semifree module over a FiniteCdga: free generators, triangular d."""

    base: FiniteCdga
    gens: list[Generator]
    dgens: list[ModElt]

    def d_of_gen(self, i: int) -> ModElt:
        return self.dgens[i]

    def elt_d(self, x: ModElt) -> ModElt:
        """d(sum a_j g_j) = sum (da_j) g_j + (-1)^{|a_j|} a_j d(g_j)."""
        out: ModElt = {}
        for j, a in x.items():
            da = self.base.d_elt(a)
            if da:
                _mod_add(out, j, da)
            for p, v in a.items():
                sgn = -1 if p[0] % 2 else 1
                aa = t_single(p, v)
                for j2, c2 in self.dgens[j].items():
                    prod = self.base.mul_elt(aa, c2)
                    if sgn == -1:
                        prod = t_scale(-1, prod)
                    if prod:
                        _mod_add(out, j2, prod)
        return {j: a for j, a in out.items() if a}

    def evaluate(
        self, degree_cutoff: int, weight_cutoff: int, *, check: bool = False
    ) -> "EvaluatedFreeModule":
        return EvaluatedFreeModule(self, degree_cutoff, weight_cutoff, check=check)


def _mod_add(out: ModElt, j: int, terms: Terms):
    if j in out:
        out[j] = t_add(out[j], terms)
    else:
        out[j] = dict(terms)
    if not out[j]:
        del out[j]


class EvaluatedFreeModule(DgModule):
    """Realization of a free module presentation within cutoffs.

    Basis triples: (base piece, base index, generator index)."""

    def __init__(self, pres: FreeModulePresentation, degree_cutoff, weight_cutoff, *, check=False):
        self.pres = pres
        base = pres.base
        index: dict[Bidegree, list[tuple[Bidegree, int, int]]] = {}
        for gi, g in enumerate(pres.gens):
            for bp in sorted(base.basis):
                d, w = g.degree + bp[0], g.weight + bp[1]
                if d > degree_cutoff or w > weight_cutoff:
                    continue
                for bi in range(base.dim(bp)):
                    index.setdefault((d, w), []).append((bp, bi, gi))
        for p in index:
            index[p].sort(key=lambda t: (t[2], t[0], t[1]))
        self.index = index
        self.position = {}
        for p, items in index.items():
            for k, tr in enumerate(items):
                self.position[tr] = (p, k)
        basis = {
            p: tuple(
                f"{base.basis[bp][bi]}*{pres.gens[gi].name}" for (bp, bi, gi) in items
            )
            for p, items in index.items()
        }
        diff = {}
        for p, items in index.items():
            d, w = p
            if d == 0 or (d - 1, w) not in index:
                continue
            cols = []
            for (bp, bi, gi) in items:
                x: ModElt = {gi: t_single(bp, _unit(base.dim(bp), bi))}
                dx = pres.elt_d(x)
                cols.append(self._vec(dx, (d - 1, w)))
            mat = Matrix.from_columns(len(index[(d - 1, w)]), cols)
            if not mat.is_zero():
                diff[p] = mat
        action = {}
        for pa in base.pieces():
            for p, items in index.items():
                tgt = (pa[0] + p[0], pa[1] + p[1])
                if tgt[0] > degree_cutoff or tgt[1] > weight_cutoff:
                    continue
                tdim = len(index.get(tgt, ()))
                na = base.dim(pa)
                nm = len(items)
                cols = []
                for i in range(na):
                    aelt = base.basis_elt(pa, i)
                    for (bp, bi, gi) in items:
                        prod = base.mul_elt(aelt, t_single(bp, _unit(base.dim(bp), bi)))
                        x: ModElt = {gi: prod}
                        cols.append(self._vec(x, tgt) if tdim else ())
                mat = Matrix.from_columns(tdim, cols)
                if not mat.is_zero():
                    action[(pa, p)] = mat
        super().__init__(
            base,
            basis,
            diff,
            action,
            degree_bound=degree_cutoff,
            weight_bound=weight_cutoff,
            check=check,
        )

    def _vec(self, x: ModElt, piece: Bidegree) -> Vector:
        n = len(self.index.get(piece, ()))
        out = [Fraction(0)] * n
        for gi, terms in x.items():
            for bp, v in terms.items():
                for bi, c in enumerate(v):
                    if c == 0:
                        continue
                    pos = self.position.get((bp, bi, gi))
                    if pos is None:
                        continue
                    pp, k = pos
                    if pp != piece:
                        raise DgalgError("module element not homogeneous")
                    out[k] += c
        return tuple(out)

    def gen_elt(self, i: int) -> Terms:
        """The i-th free generator (coefficient 1) as an element."""
        g = self.pres.gens[i]
        piece = (g.degree, g.weight)
        return t_single(piece, self._vec({i: self.pres.base.unit_elt()}, piece))

    def modelt_terms(self, x: ModElt) -> Terms:
        """Coordinates of a module element, piece by piece."""
        out: Terms = {}
        for gi, terms in x.items():
            g = self.pres.gens[gi]
            for bp, v in terms.items():
                piece = (g.degree + bp[0], g.weight + bp[1])
                out = t_add(
                    out, t_single(piece, self._vec({gi: t_single(bp, v)}, piece))
                )
        return {p: v for p, v in out.items() if any(c != 0 for c in v)}

    def terms_to_modelt(self, x: Terms) -> ModElt:
        out: ModElt = {}
        for piece, v in x.items():
            items = self.index.get(piece, ())
            for k, c in enumerate(v):
                if c == 0:
                    continue
                bp, bi, gi = items[k]
                _mod_add(out, gi, t_single(bp, _scaled(self.pres.base.dim(bp), bi, c)))
        return out


def _unit(n, i):
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


def _scaled(n, i, c):
    return tuple(Fraction(c) if j == i else Fraction(0) for j in range(n))


def module_map_from_images(
    p: EvaluatedFreeModule, m: DgModule, images: list[Terms], *, check: bool = False
) -> ChainMap:
    blocks = {}
    for piece, items in p.index.items():
        cols = []
        for (bp, bi, gi) in items:
            a = p.pres.base.basis_elt(bp, bi)
            img = m.act(a, images[gi])
            cols.append(img.get(piece, zero_vec(m.dim(piece))))
        blocks[piece] = Matrix.from_columns(m.dim(piece), cols)
    return ChainMap(p, m, blocks, check=check)


@dataclass
class ModuleResolution:
    presentation: FreeModulePresentation
    module: EvaluatedFreeModule
    quasi_iso: ChainMap  # module -> target
    gen_images: list[Terms]
    certified_degree: int


def resolve_module(
    m: DgModule,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    deadline: float | None = None,
) -> ModuleResolution:
    """Semifree resolution of a dg module over its base algebra."""
    base = m.over
    if degree_cutoff > base.degree_bound or weight_cutoff > base.weight_bound:
        raise CutoffInsufficient("base bounds below the requested cutoffs")
    pres = FreeModulePresentation(base, [], [])
    images: list[Terms] = []
    hm = Homology(m)
    cert = degree_cutoff - 1
    gen_count = 0
    for k in range(cert + 1):
        for _pass in range(_MAX_PASSES):
            _check_deadline(deadline)
            ev = pres.evaluate(degree_cutoff, weight_cutoff)
            phi = module_map_from_images(ev, m, images)
            hp = Homology(ev)
            added = False
            for w in range(weight_cutoff + 1):
                nt = hm.dim(k, w)
                ns = hp.dim(k, w)
                if nt:
                    cols = []
                    for i in range(ns):
                        img = phi.apply(hp.rep_elt((k, w), i))
                        cols.append(
                            hm.reduce((k, w), img.get((k, w), zero_vec(m.dim((k, w)))))
                        )
                    image_mat = Matrix.from_columns(nt, cols)
                    hit = column_space_basis(image_mat)
                    for j in range(nt):
                        tcl = tuple(Fraction(1 if i == j else 0) for i in range(nt))
                        cand = hit.hstack(Matrix.from_columns(nt, [tcl]))
                        if rank(cand) == hit.ncols:
                            continue
                        hit = cand
                        g = Generator(f"p{gen_count}", k, w)
                        gen_count += 1
                        pres = FreeModulePresentation(
                            base, pres.gens + [g], pres.dgens + [{}]
                        )
                        images = images + [hm.rep_elt((k, w), j)]
                        added = True
            if added:
                continue
            for w in range(weight_cutoff + 1):
                ns = hp.dim(k, w)
                if ns == 0:
                    continue
                nt = hm.dim(k, w)
                cols = []
                for i in range(ns):
                    img = phi.apply(hp.rep_elt((k, w), i))
                    cols.append(
                        hm.reduce((k, w), img.get((k, w), zero_vec(m.dim((k, w)))))
                    )
                mat = Matrix.from_columns(nt, cols)
                ker = kernel_basis(mat)
                for j in range(ker.ncols):
                    if k + 1 > degree_cutoff:
                        break
                    coeffs = ker.column(j)
                    z: Terms = {}
                    for i, c in enumerate(coeffs):
                        if c != 0:
                            z = t_add(z, t_scale(c, hp.rep_elt((k, w), i)))
                    img = phi.apply(z)
                    v = img.get((k, w), zero_vec(m.dim((k, w))))
                    dmat = m.d_mat((k + 1, w))
                    if dmat is None:
                        if any(c != 0 for c in v):
                            raise DgalgError("kernel class not a boundary")
                        m_val: Terms = {}
                    else:
                        m_val = t_single((k + 1, w), solve(dmat, v))
                    g = Generator(f"p{gen_count}", k + 1, w)
                    gen_count += 1
                    pres = FreeModulePresentation(
                        base, pres.gens + [g], pres.dgens + [ev.terms_to_modelt(z)]
                    )
                    images = images + [m_val]
                    added = True
                if added:
                    break
            if not added:
                break
        else:
            raise DgalgError(f"module resolution did not stabilize at degree {k}")
    ev = pres.evaluate(degree_cutoff, weight_cutoff)
    phi = module_map_from_images(ev, m, images)
    return ModuleResolution(pres, ev, phi, images, cert)


# ---------------------------------------------------------------------------
# derived tensor product
# ---------------------------------------------------------------------------


def tensor_free_with_module(
    pres: FreeModulePresentation,
    n: DgModule,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    name: str = "",
) -> DgModule:
    """(free module P) tensor_A N: one copy of N per generator, twisted d."""
    base = pres.base
    if n.over is not base and not (base.total_dim() == 1 and n.over.total_dim() == 1):
        raise ValueError("tensor factors over different algebras")
    index: dict[Bidegree, list[tuple[int, Bidegree, int]]] = {}
    for gi, g in enumerate(pres.gens):
        for pn in sorted(n.basis):
            d, w = g.degree + pn[0], g.weight + pn[1]
            if d > degree_cutoff or w > weight_cutoff:
                continue
            for ni in range(n.dim(pn)):
                index.setdefault((d, w), []).append((gi, pn, ni))
    position = {}
    for p, items in index.items():
        items.sort(key=lambda t: (t[0], t[1], t[2]))
        for k, tr in enumerate(items):
            position[tr] = (p, k)
    basis = {
        p: tuple(f"{pres.gens[gi].name}(x){n.basis[pn][ni]}" for (gi, pn, ni) in items)
        for p, items in index.items()
    }

    def elt_vec(pairs: list[tuple[int, Terms]], piece: Bidegree) -> Vector:
        # pairs: (generator index, element of N as Terms)
        total = len(index.get(piece, ()))
        out = [Fraction(0)] * total
        for gi, terms in pairs:
            for pn, v in terms.items():
                for ni, c in enumerate(v):
                    if c == 0:
                        continue
                    pos = position.get((gi, pn, ni))
                    if pos is None:
                        continue
                    pp, k = pos
                    if pp != piece:
                        raise DgalgError("tensor element not homogeneous")
                    out[k] += c
        return tuple(out)

    diff = {}
    for p, items in index.items():
        d, w = p
        if d == 0 or (d - 1, w) not in index:
            continue
        cols = []
        for (gi, pn, ni) in items:
            g = pres.gens[gi]
            nelt = t_single(pn, _unit(n.dim(pn), ni))
            pairs: list[tuple[int, Terms]] = []
            # d(g (x) x) = sum_j +-(g_j (x) a_j x) + (-1)^{|g|} g (x) dx
            for j, a in pres.dgens[gi].items():
                gj = pres.gens[j]
                for pa, va in a.items():
                    sgn = -1 if (pa[0] % 2 and gj.degree % 2) else 1
                    ax = n.act(t_single(pa, va), nelt)
                    if sgn == -1:
                        ax = t_scale(-1, ax)
                    if ax:
                        pairs.append((j, ax))
            sgn_g = -1 if g.degree % 2 else 1
            dx = n.d_elt(nelt)
            if dx:
                pairs.append((gi, t_scale(sgn_g, dx)))
            cols.append(elt_vec(pairs, (d - 1, w)))
        mat = Matrix.from_columns(len(index[(d - 1, w)]), cols)
        if not mat.is_zero():
            diff[p] = mat
    action = {}
    for pa in base.pieces():
        for p, items in index.items():
            tgt = (pa[0] + p[0], pa[1] + p[1])
            if tgt[0] > degree_cutoff or tgt[1] > weight_cutoff:
                continue
            tdim = len(index.get(tgt, ()))
            na = base.dim(pa)
            cols = []
            for i in range(na):
                aelt = base.basis_elt(pa, i)
                for (gi, pn, ni) in items:
                    g = pres.gens[gi]
                    sgn = -1 if (pa[0] % 2 and g.degree % 2) else 1
                    ax = n.act(aelt, t_single(pn, _unit(n.dim(pn), ni)))
                    if sgn == -1:
                        ax = t_scale(-1, ax)
                    cols.append(elt_vec([(gi, ax)], tgt) if tdim else ())
            mat = Matrix.from_columns(tdim, cols)
            if not mat.is_zero():
                action[(pa, p)] = mat
    return DgModule(
        base,
        basis,
        diff,
        action,
        degree_bound=degree_cutoff,
        weight_bound=weight_cutoff,
        check=False,
        name=name or "tensor",
    )


@dataclass
class DerivedTensor:
    module: DgModule
    homology_table: dict[Bidegree, int]
    certified_degree: int
    side: str


def derived_tensor(
    m: DgModule,
    n: DgModule,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    side: str = "left",
    deadline: float | None = None,
) -> DerivedTensor:
    """M tensor^L_A N, computed by resolving one factor semifreely."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    resolved, other = (m, n) if side == "left" else (n, m)
    res = resolve_module(resolved, degree_cutoff, weight_cutoff, deadline=deadline)
    t = tensor_free_with_module(
        res.presentation, other, degree_cutoff, weight_cutoff,
        name=f"{m.name}(x){n.name}",
    )
    h = Homology(t)
    cert = degree_cutoff - 1
    table = h.table(cert)
    return DerivedTensor(t, table, cert, side)


# ---------------------------------------------------------------------------
# pushouts
# ---------------------------------------------------------------------------


@dataclass
class Pushout:
    algebra: EvaluatedAlgebra
    replacement: SemifreeReplacement  # R ~ B over A
    r_to_pushout: CdgaMorphism  # R -> B (x)_A C   (j1 through the replacement)
    j2: CdgaMorphism  # C -> B (x)_A C
    certified_degree: int


def pushout(
    f: CdgaMorphism,
    g: CdgaMorphism,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    replacement: SemifreeReplacement | None = None,
    deadline: float | None = None,
    check: bool = False,
    name: str = "",
) -> Pushout:
    """Homotopy pushout B (x)_A C of f: A -> B and g: A -> C.

    The f leg is replaced semifreely (or a precomputed replacement passed in)
    and its presentation is base-changed along g.
    """
    if f.source is not g.source:
        raise ValueError("pushout legs must share their source")
    rep = replacement or semifree_replacement(
        f, degree_cutoff, weight_cutoff, deadline=deadline
    )
    pres_c = base_change(rep.presentation, g, check=False)
    ev = pres_c.evaluate(degree_cutoff, weight_cutoff, check=check, name=name or "pushout")
    j1 = evaluation_map(rep.algebra, ev, g, check=False, name="j1")
    j2 = ev.base_inclusion()
    return Pushout(ev, rep, j1, j2, degree_cutoff - 1)


def pushout_fold(
    po: Pushout, to: FiniteCdga, from_c: CdgaMorphism, gen_images_in_to: list[Terms],
    *, check: bool = False, name: str = "",
) -> CdgaMorphism:
    """Universal map out of a pushout, from a map C -> X and generator images."""
    return morphism_from_images(
        po.algebra, to, from_c, gen_images_in_to, check=check, name=name
    )


# ---------------------------------------------------------------------------
# products, path replacement, homotopy pullback
# ---------------------------------------------------------------------------


def product_cdga(b: FiniteCdga, c: FiniteCdga, *, check: bool = False) -> tuple[FiniteCdga, CdgaMorphism, CdgaMorphism]:
    """Direct product B x C with its projections."""
    db = min(b.degree_bound, c.degree_bound)
    wb = min(b.weight_bound, c.weight_bound)
    basis = {}
    for d in range(db + 1):
        for w in range(wb + 1):
            nb, nc = b.dim((d, w)), c.dim((d, w))
            if nb + nc:
                basis[(d, w)] = tuple(
                    [f"l_{x}" for x in (b.basis.get((d, w)) or ())]
                    + [f"r_{x}" for x in (c.basis.get((d, w)) or ())]
                )
    diff = {}
    for p in basis:
        d, w = p
        if d == 0 or (d - 1, w) not in basis:
            continue
        nb, nc = b.dim(p), c.dim(p)
        tb, tc = b.dim((d - 1, w)), c.dim((d - 1, w))
        mat = Matrix.zero(tb + tc, nb + nc)
        mb = b.d_mat(p)
        if mb is not None:
            for j in range(nb):
                for i, x in enumerate(mb.column(j)):
                    mat.rows[i][j] = x
        mc = c.d_mat(p)
        if mc is not None:
            for j in range(nc):
                for i, x in enumerate(mc.column(j)):
                    mat.rows[tb + i][nb + j] = x
        if not mat.is_zero():
            diff[p] = mat
    mul = {}
    for p1 in basis:
        for p2 in basis:
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if tgt not in basis:
                continue
            n1b, n1c = b.dim(p1), c.dim(p1)
            n2b, n2c = b.dim(p2), c.dim(p2)
            tb, tc = b.dim(tgt), c.dim(tgt)
            n1, n2 = n1b + n1c, n2b + n2c
            mat = Matrix.zero(tb + tc, n1 * n2)
            mb = b.mul_mat(p1, p2)
            mc = c.mul_mat(p1, p2)
            for i in range(n1):
                for j in range(n2):
                    ci = i * n2 + j
                    if i < n1b and j < n2b and mb is not None:
                        pair = [Fraction(0)] * (n1b * n2b)
                        pair[i * n2b + j] = Fraction(1)
                        for r, x in enumerate(mb.apply(pair)):
                            mat.rows[r][ci] = x
                    elif i >= n1b and j >= n2b and mc is not None:
                        pair = [Fraction(0)] * (n1c * n2c)
                        pair[(i - n1b) * n2c + (j - n2b)] = Fraction(1)
                        for r, x in enumerate(mc.apply(pair)):
                            mat.rows[tb + r][ci] = x
            if not mat.is_zero():
                mul[(p1, p2)] = mat
    unit = tuple(list(b.unit) + list(c.unit))
    prod = FiniteCdga(
        basis, diff, mul, unit, degree_bound=db, weight_bound=wb, check=check,
        name=f"({b.name})x({c.name})",
    )
    pr1_blocks = {}
    pr2_blocks = {}
    for p in basis:
        nb, nc = b.dim(p), c.dim(p)
        m1 = Matrix.zero(nb, nb + nc)
        for j in range(nb):
            m1.rows[j][j] = Fraction(1)
        pr1_blocks[p] = m1
        m2 = Matrix.zero(nc, nb + nc)
        for j in range(nc):
            m2.rows[j][nb + j] = Fraction(1)
        pr2_blocks[p] = m2
    pr1 = CdgaMorphism(prod, b, pr1_blocks, check=False)
    pr2 = CdgaMorphism(prod, c, pr2_blocks, check=False)
    return prod, pr1, pr2


def path_fibration_replacement(
    g: CdgaMorphism, *, check: bool = False
) -> tuple[FiniteCdga, CdgaMorphism, CdgaMorphism]:
    """Replace g: C -> T by a degreewise surjection when T = B + W is a
    split square-zero extension (built by trivial_square_zero).

    Returns (E, eps: E -> T surjective, q: E -> C quasi-iso) with
    E = C + (acyclic path on W), multiplicative because W.W = 0.
    """
    t = g.target
    split = getattr(t, "_split", None)
    if split is None:
        raise UnsupportedDiagram(
            "fibration replacement needs a split square-zero target"
        )
    b_dims, w_mod = split  # per-piece B-part dimension, and the W complex
    c = g.source
    db = min(c.degree_bound, t.degree_bound)
    wb = min(c.weight_bound, t.weight_bound)
    # require the B-component of g to be degreewise surjective
    for p in t.basis:
        if p[0] > db or p[1] > wb:
            continue
        nb = b_dims.get(p, 0)
        if nb == 0:
            continue
        blk = g.block(p)
        bpart = Matrix(nb, blk.ncols, [blk.rows[i] for i in range(nb)])
        if rank(bpart) < nb:
            raise UnsupportedDiagram(
                "the algebra part of the replaced leg is not surjective"
            )

    def w_dim(p):
        return t.dim(p) - b_dims.get(p, 0)

    # basis: C_p + W_p + W_{p+1}
    basis = {}
    for d in range(db + 1):
        for w in range(wb + 1):
            n = c.dim((d, w)) + w_dim((d, w)) + w_dim((d + 1, w))
            if n:
                basis[(d, w)] = tuple(
                    [f"c{i}" for i in range(c.dim((d, w)))]
                    + [f"x{i}" for i in range(w_dim((d, w)))]
                    + [f"y{i}" for i in range(w_dim((d + 1, w)))]
                )

    def w_of(v: Vector, p) -> Vector:
        """W-part of a T-vector."""
        return tuple(v[b_dims.get(p, 0):])

    def t_embed_w(wvec: Vector, p) -> Vector:
        return tuple([Fraction(0)] * b_dims.get(p, 0) + list(wvec))

    def dW(p) -> Matrix | None:
        """Differential of W from T's (W is a subcomplex: the ideal part)."""
        dm = t.d_mat(p)
        if dm is None:
            return None
        nb = b_dims.get(p, 0)
        nbd = b_dims.get((p[0] - 1, p[1]), 0)
        nw = w_dim(p)
        out = Matrix.zero(w_dim((p[0] - 1, p[1])), nw)
        for j in range(nw):
            col = dm.column(nb + j)
            # B-part of d(W) must vanish (W is a subcomplex)
            for i in range(nbd):
                if col[i] != 0:
                    raise DgalgError("split part is not a subcomplex")
            for i in range(out.nrows):
                out.rows[i][j] = col[nbd + i]
        return out

    diff = {}
    for p in basis:
        d, w = p
        if d == 0 or (d - 1, w) not in basis:
            continue
        nc, nx, ny = c.dim(p), w_dim(p), w_dim((d + 1, w))
        tc, tx, ty = c.dim((d - 1, w)), w_dim((d - 1, w)), w_dim((d, w))
        mat = Matrix.zero(tc + tx + ty, nc + nx + ny)
        mc = c.d_mat(p)
        if mc is not None:
            for j in range(nc):
                for i, v in enumerate(mc.column(j)):
                    mat.rows[i][j] = v
        dx = dW(p)
        for j in range(nx):
            if dx is not None:
                for i, v in enumerate(dx.column(j)):
                    mat.rows[tc + i][nc + j] = v
            # x lands in the W_{d} slot of degree d-1 (the y-slot there)
            mat.rows[tc + tx + j][nc + j] += Fraction(1)
        dy = dW((d + 1, w))
        for j in range(ny):
            if dy is not None:
                for i, v in enumerate(dy.column(j)):
                    mat.rows[tc + tx + i][nc + nx + j] -= v
        if not mat.is_zero():
            diff[p] = mat

    # products: (c,x,y)(c',x',y') = (cc', g(c)x' +- x g(c'), g(c)y' +- y g(c'))
    mul = {}
    for p1 in basis:
        for p2 in basis:
            tgt = (p1[0] + p2[0], p1[1] + p2[1])
            if tgt not in basis and (tgt[0] > db or tgt[1] > wb):
                continue
            if tgt not in basis:
                continue
            n1c, n1x, n1y = c.dim(p1), w_dim(p1), w_dim((p1[0] + 1, p1[1]))
            n2c, n2x, n2y = c.dim(p2), w_dim(p2), w_dim((p2[0] + 1, p2[1]))
            tcn, txn, tyn = c.dim(tgt), w_dim(tgt), w_dim((tgt[0] + 1, tgt[1]))
            n1 = n1c + n1x + n1y
            n2 = n2c + n2x + n2y
            mat = Matrix.zero(tcn + txn + tyn, n1 * n2)

            def g_of_c(p, i) -> Terms:
                return g.apply(c.basis_elt(p, i))

            for i in range(n1):
                for j in range(n2):
                    ci = i * n2 + j
                    if i < n1c and j < n2c:
                        prod = c.basis_product(p1, i, p2, j)
                        v = prod.get(tgt)
                        if v is not None:
                            for r, x in enumerate(v):
                                mat.rows[r][ci] = x
                    elif i < n1c and j >= n2c:
                        # c * (x or y slot): g(c) * w in T
                        gc = g_of_c(p1, i)
                        if j < n2c + n2x:
                            wp = p2
                            widx = j - n2c
                            slot = "x"
                        else:
                            wp = (p2[0] + 1, p2[1])
                            widx = j - n2c - n2x
                            slot = "y"
                        wv = t_embed_w(_unit(w_dim(wp), widx), wp)
                        prod = t.mul_elt(gc, t_single(wp, wv))
                        tp = (p1[0] + wp[0], p1[1] + wp[1])
                        v = prod.get(tp)
                        if v is None:
                            continue
                        wout = w_of(v, tp)
                        if slot == "x":
                            for r, x in enumerate(wout):
                                mat.rows[tcn + r][ci] = x
                        else:
                            # shift sign: c acting on the y-slot
                            s = -1 if p1[0] % 2 else 1
                            for r, x in enumerate(wout):
                                mat.rows[tcn + txn + r][ci] = s * x
                    elif i >= n1c and j < n2c:
                        gc = g_of_c(p2, j)
                        if i < n1c + n1x:
                            wp = p1
                            widx = i - n1c
                            slot = "x"
                        else:
                            wp = (p1[0] + 1, p1[1])
                            widx = i - n1c - n1x
                            slot = "y"
                        wv = t_embed_w(_unit(w_dim(wp), widx), wp)
                        # w * g(c) = (-1)^{|w||c|} g(c) * w with |w| the slot
                        # degree (p1[0] for both slots: the y slot carries a
                        # shifted element of degree p1[0])
                        prod = t.mul_elt(gc, t_single(wp, wv))
                        tp = (p2[0] + wp[0], p2[1] + wp[1])
                        v = prod.get(tp)
                        if v is None:
                            continue
                        wout = w_of(v, tp)
                        sgn = -1 if (p1[0] % 2 and p2[0] % 2) else 1
                        if slot == "x":
                            for r, x in enumerate(wout):
                                mat.rows[tcn + r][ci] = sgn * x
                        else:
                            s = -1 if p2[0] % 2 else 1
                            for r, x in enumerate(wout):
                                mat.rows[tcn + txn + r][ci] = sgn * s * x
                    # (x/y) * (x/y) = 0 since W.W = 0
            if not mat.is_zero():
                mul[(p1, p2)] = mat
    unit = tuple(
        list(c.unit)
        + [Fraction(0)] * (w_dim((0, 0)) + w_dim((1, 0)))
    )
    e = FiniteCdga(
        basis, diff, mul, unit, degree_bound=db, weight_bound=wb, check=check,
        name="path_repl",
    )
    eps_blocks = {}
    for p in basis:
        nc, nx, ny = c.dim(p), w_dim(p), w_dim((p[0] + 1, p[1]))
        nt = t.dim(p)
        nb = b_dims.get(p, 0)
        mat = Matrix.zero(nt, nc + nx + ny)
        gb = g.block(p)
        for j in range(nc):
            for i, v in enumerate(gb.column(j)):
                mat.rows[i][j] = v
        for j in range(nx):
            mat.rows[nb + j][nc + j] += Fraction(1)
        eps_blocks[p] = mat
    eps = CdgaMorphism(e, t, eps_blocks, check=check, name="eps")
    q_blocks = {}
    for p in basis:
        nc, nx, ny = c.dim(p), w_dim(p), w_dim((p[0] + 1, p[1]))
        mat = Matrix.zero(nc, nc + nx + ny)
        for j in range(nc):
            mat.rows[j][j] = Fraction(1)
        q_blocks[p] = mat
    q = CdgaMorphism(e, c, q_blocks, check=check, name="q")
    return e, eps, q


@dataclass
class PullbackSquare:
    algebra: FiniteCdga
    to_b: CdgaMorphism  # pullback -> B   (the f leg source)
    to_c: CdgaMorphism  # pullback -> C   (the g leg source)
    f: CdgaMorphism
    g: CdgaMorphism
    replaced: str  # which leg was replaced ("none", "f", "g")
    # populated when the g leg went through the path replacement:
    incl: CdgaMorphism | None = None  # pullback -> B x E
    path: tuple | None = None  # (E, eps: E -> T, q: E -> C)
    to_e: CdgaMorphism | None = None  # pullback -> E


def _strict_pullback_full(
    f: CdgaMorphism, g: CdgaMorphism, *, check: bool = False
) -> tuple[FiniteCdga, CdgaMorphism, CdgaMorphism, CdgaMorphism]:
    """Strict pullback plus its inclusion into the product B x C."""
    b, c = f.source, g.source
    prod, pr1, pr2 = product_cdga(b, c, check=False)
    spans = {}
    for p in prod.basis:
        nb, nc = b.dim(p), c.dim(p)
        nt = f.target.dim(p)
        mat = Matrix.zero(nt, nb + nc)
        fb = f.block(p)
        for j in range(nb):
            for i, v in enumerate(fb.column(j)):
                mat.rows[i][j] = v
        gb = g.block(p)
        for j in range(nc):
            for i, v in enumerate(gb.column(j)):
                mat.rows[i][nb + j] -= v
        spans[p] = kernel_basis(mat)
    sub, incl = sub_cdga(prod, spans, check=check, name="pullback")
    return sub, pr1.compose(incl), pr2.compose(incl), incl


def strict_pullback(
    f: CdgaMorphism, g: CdgaMorphism, *, check: bool = False
) -> tuple[FiniteCdga, CdgaMorphism, CdgaMorphism]:
    """Strict pullback {(b, c) : f(b) = g(c)} as a subalgebra of B x C."""
    sub, to_b, to_c, _ = _strict_pullback_full(f, g, check=check)
    return sub, to_b, to_c


def homotopy_pullback(
    f: CdgaMorphism, g: CdgaMorphism, *, check: bool = False,
    force_replace: bool = False,
) -> PullbackSquare:
    """Homotopy pullback of B -f-> T <-g- C.

    If a leg is already degreewise surjective the strict pullback computes it;
    otherwise the g leg is replaced by the path fibration, which requires the
    common target to be a split square-zero extension.  ``force_replace``
    always replaces the g leg (callers needing the path coordinates).
    """
    if f.target is not g.target:
        raise ValueError("pullback legs must share their target")
    if not force_replace:
        if g.is_surjective():
            p, to_b, to_c = strict_pullback(f, g, check=check)
            return PullbackSquare(p, to_b, to_c, f, g, "none")
        if f.is_surjective():
            p, to_c, to_b = strict_pullback(g, f, check=check)
            return PullbackSquare(p, to_b, to_c, f, g, "none")
    e, eps, q = path_fibration_replacement(g, check=check)
    p, to_b, to_e, incl = _strict_pullback_full(f, eps, check=check)
    return PullbackSquare(
        p, to_b, q.compose(to_e), f, g, "g",
        incl=incl, path=(e, eps, q), to_e=to_e,
    )


# ---------------------------------------------------------------------------
# lifting against a pullback square
# ---------------------------------------------------------------------------


def homotopy_between(
    f: ChainMap, g: ChainMap
) -> dict[Bidegree, Matrix] | None:
    """A chain homotopy h with f - g = d h + h d, or None.

    Solved degree by degree from the bottom; h[p] maps piece p to the piece
    one degree up.
    """
    if f.source is not g.source or f.target is not g.target:
        raise ValueError("homotopy endpoints mismatch")
    src, tgt = f.source, f.target
    db = min(src.degree_bound, tgt.degree_bound)
    wb = min(src.weight_bound, tgt.weight_bound)
    h: dict[Bidegree, Matrix] = {}
    for d in range(db):
        for w in range(wb + 1):
            ns = src.dim((d, w))
            if ns == 0:
                continue
            diffmat = f.block((d, w)).add(g.block((d, w)).scale(-1))
            # subtract h_{d-1} d_d
            if d >= 1 and (d - 1, w) in h:
                dmat = src.d_mat((d, w))
                if dmat is not None:
                    diffmat = diffmat.add(h[(d - 1, w)].mul(dmat).scale(-1))
            nt_up = tgt.dim((d + 1, w))
            dup = tgt.d_mat((d + 1, w))
            if diffmat.is_zero():
                h[(d, w)] = Matrix.zero(nt_up, ns)
                continue
            if dup is None or nt_up == 0:
                return None
            try:
                cols = [solve(dup, diffmat.column(j)) for j in range(ns)]
            except NoSolution:
                return None
            h[(d, w)] = Matrix.from_columns(nt_up, cols)
    return h


def check_homotopy(
    f: ChainMap, g: ChainMap, h: dict[Bidegree, Matrix], *, through_degree: int | None = None
) -> bool:
    src, tgt = f.source, f.target
    db = min(src.degree_bound, tgt.degree_bound)
    if through_degree is not None:
        db = min(db, through_degree)
    wb = min(src.weight_bound, tgt.weight_bound)
    for d in range(db):
        for w in range(wb + 1):
            ns = src.dim((d, w))
            if ns == 0:
                continue
            lhs = f.block((d, w)).add(g.block((d, w)).scale(-1))
            rhs = Matrix.zero(tgt.dim((d, w)), ns)
            hm = h.get((d, w))
            dup = tgt.d_mat((d + 1, w))
            if hm is not None and dup is not None:
                rhs = rhs.add(dup.mul(hm))
            dmat = src.d_mat((d, w))
            hd = h.get((d - 1, w))
            if dmat is not None and hd is not None:
                rhs = rhs.add(hd.mul(dmat))
            if lhs != rhs:
                return False
    return True


def lift_along(
    square: PullbackSquare,
    x: EvaluatedAlgebra,
    alpha: CdgaMorphism,
    beta: CdgaMorphism,
    homotopy_witness: dict[Bidegree, Matrix],
    *,
    base_to_pullback: CdgaMorphism | None = None,
) -> CdgaMorphism:
    """A map γ: X -> pullback with to_b∘γ = α strictly and to_c∘γ ≃ β.

    X must be an evaluated semifree algebra; the witness must certify
    f∘α ≃ g∘β (validated; NoSolution otherwise).  γ is built generator by
    generator through exact linear solves.
    """
    p = square.algebra
    if alpha.source is not x or beta.source is not x:
        raise ValueError("lift inputs must start from X")
    fa = square.f.compose(alpha)
    gb = square.g.compose(beta)
    if not check_homotopy(fa, gb, homotopy_witness):
        raise NoSolution("the supplied homotopy does not witness f∘α ≃ g∘β")
    base = x.pres.base
    if base_to_pullback is None:
        if base.total_dim() != 1:
            raise ValueError("a base map into the pullback is required")
        blocks = {(0, 0): Matrix.from_columns(p.dim((0, 0)), [p.unit])}
        base_to_pullback = CdgaMorphism(base, p, blocks, check=False)
    t = square.f.target
    split = getattr(t, "_split", None)
    pin = square.path is not None and split is not None
    images: list[Terms] = []
    for gi, gen in enumerate(x.pres.gens):
        piece = (gen.degree, gen.weight)
        # value of γ on d(gen), using the images chosen so far
        dpoly = x.pres.dgens[gi]
        rhs: Terms = {}
        for mono, bterms in dpoly.items():
            img = base_to_pullback.apply(bterms)
            cur = img
            for (j, e) in mono:
                for _ in range(e):
                    cur = p.mul_elt(cur, images[j])
            rhs = t_add(rhs, cur)
        rhs_v = rhs.get((gen.degree - 1, gen.weight), zero_vec(p.dim((gen.degree - 1, gen.weight)))) if gen.degree >= 1 else ()
        # unknown: v in p at piece with to_b(v) = alpha(gen), d v = rhs
        np_ = p.dim(piece)
        to_b_blk = square.to_b.block(piece)
        a_img = alpha.apply(x.generator_elt(gi))
        a_v = a_img.get(piece, zero_vec(square.f.source.dim(piece)))
        rows = [list(r) for r in to_b_blk.rows]
        target = list(a_v)
        if gen.degree >= 1:
            dmat = p.d_mat(piece)
            if dmat is None:
                dmat = Matrix.zero(p.dim((gen.degree - 1, gen.weight)), np_)
            rows += [list(r) for r in dmat.rows]
            target += list(rhs_v)
        sys = Matrix(len(rows), np_, rows)
        sol = None
        if pin:
            # pin the second leg strictly to β and the path coordinate to the
            # witness: without this, the fiber directions of γ are left to the
            # solver and the lift can land in the wrong homotopy class
            d_, w_ = piece
            up = (d_ + 1, w_)
            nb_up = split[0].get(up, 0)
            ny = t.dim(up) - nb_up
            gen_v = x.generator_elt(gi).get(piece, zero_vec(x.dim(piece)))
            to_c_blk = square.to_c.block(piece)
            b_img = beta.apply(x.generator_elt(gi))
            b_v = b_img.get(piece, zero_vec(square.g.source.dim(piece)))
            prows = [list(r) for r in rows] + [list(r) for r in to_c_blk.rows]
            ptarget = list(target) + list(b_v)
            if ny:
                hblk = homotopy_witness.get(piece)
                hv = (
                    tuple(hblk.apply(gen_v))
                    if hblk is not None
                    else zero_vec(t.dim(up))
                )
                hw = hv[nb_up:]
                yoff = (
                    square.f.source.dim(piece)
                    + square.g.source.dim(piece)
                    + t.dim(piece) - split[0].get(piece, 0)
                )
                inclb = square.incl.block(piece)
                prows += [list(inclb.rows[yoff + i]) for i in range(ny)]
                ptarget += list(hw)
            try:
                sol = solve(Matrix(len(prows), np_, prows), vec(ptarget))
            except NoSolution:
                sol = None
        if sol is None:
            sol = solve(sys, vec(target))
        images.append(t_single(piece, sol))
    gamma = morphism_from_images(
        x, p, base_to_pullback, images, check=False, name="lift"
    )
    # strict: to_b ∘ γ = α
    comp = square.to_b.compose(gamma)
    for piece in x.basis:
        if comp.block(piece) != alpha.block(piece):
            raise DgalgError("lift failed to match α strictly")
    # up to homotopy: to_c ∘ γ ≃ β
    h = homotopy_between(square.to_c.compose(gamma), beta)
    if h is None:
        raise NoSolution("no chain homotopy between the lifted leg and β")
    return gamma


# ---------------------------------------------------------------------------
# connectivity
# ---------------------------------------------------------------------------


@dataclass
class ConnectivityReport:
    object_name: str
    lowest_nonzero: int | None  # None means ">= cutoff"
    certified_degree: int
    table: dict[Bidegree, int]

    @property
    def connective(self) -> int:
        """The object is n-connective for all n <= this value."""
        return (
            self.certified_degree + 1
            if self.lowest_nonzero is None
            else self.lowest_nonzero
        )


def connectivity(m: GradedObject, *, name: str = "") -> ConnectivityReport:
    h = Homology(m)
    table = h.table()
    lowest = None
    for d in range(h.certified_degree + 1):
        if h.total_dim(d):
            lowest = d
            break
    return ConnectivityReport(name or m.name, lowest, h.certified_degree, table)


def map_connectivity(f: ChainMap, *, name: str = "") -> ConnectivityReport:
    fib = hofib(f)
    return connectivity(fib, name=name or f"hofib({f.name})")
