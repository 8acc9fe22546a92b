"""Kähler differentials, cotangent complexes, derivations, and the
comparison map from the relative cofiber to the cotangent complex, with the
connectivity-estimate and weak-equivalence verifiers built on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .cdga import (
    Bidegree,
    CdgaMorphism,
    ChainMap,
    DgModule,
    FiniteCdga,
    Homology,
    Terms,
    as_complex_map,
    cone,
    hofib_complex,
    is_homology_iso,
    module_inclusion_into_trivial,
    t_add,
    t_single,
    trivial_square_zero,
    underlying_complex,
)
from .errors import DgalgError
from .homotopy import (
    EvaluatedFreeModule,
    FreeModulePresentation,
    ModElt,
    Pushout,
    PullbackSquare,
    SemifreeReplacement,
    _mod_add,
    homotopy_pullback,
    lift_along,
    map_connectivity,
    pushout,
    pushout_fold,
    resolve_algebra,
    semifree_replacement,
    unit_morphism,
)
from .linalg import Matrix, solve, zero_vec
from .semifree import (
    EvaluatedAlgebra,
    Generator,
    Monomial,
    Poly,
    SemifreePresentation,
    _poly_add_term,
    _poly_clean,
    morphism_from_images,
)


def _basis_vec(n: int, i: int):
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


# ---------------------------------------------------------------------------
# formal differentiation
# ---------------------------------------------------------------------------


def formal_derivative(pres: SemifreePresentation, poly: Poly) -> dict[int, Poly]:
    """Coefficients of the universal degree-0 derivation on a semifree algebra.

    D(p) = sum_j (coefficient_j) . delta_j with delta_j the symbol attached to
    generator j; the returned polynomials (over the base) are the coefficients
    in left-normal form.  Moving delta_j past the trailing factors of a
    monomial contributes the sign (-1)^{|g_j| |suffix|}.
    """
    out: dict[int, Poly] = {}
    for mono, bterms in poly.items():
        suffix_deg = 0
        for pos in range(len(mono) - 1, -1, -1):
            j, e = mono[pos]
            g = pres.gens[j]
            if g.odd:
                rest_here: Monomial = ()
                coeff = 1
            else:
                rest_here = ((j, e - 1),) if e > 1 else ()
                coeff = e
            rest = mono[:pos] + rest_here + mono[pos + 1 :]
            sign = -1 if (g.degree % 2 and suffix_deg % 2) else 1
            c = Fraction(sign * coeff)
            cur = out.setdefault(j, {})
            _poly_add_term(cur, rest, {p: tuple(c * x for x in v) for p, v in bterms.items()})
            suffix_deg += g.degree * e
    cleaned = {j: _poly_clean(p) for j, p in out.items()}
    return {j: p for j, p in cleaned.items() if p}


# ---------------------------------------------------------------------------
# Kähler differentials and the cotangent complex
# ---------------------------------------------------------------------------


def kaehler_presentation(
    ev: EvaluatedAlgebra, push: CdgaMorphism | None = None
) -> FreeModulePresentation:
    """Free module on one symbol per generator, with the Jacobian differential.

    With ``push`` (an algebra map out of the evaluation) the coefficients are
    carried into its target; without it the module lives over the evaluation
    itself.
    """
    base = push.target if push is not None else ev
    gens = [Generator("d" + g.name, g.degree, g.weight) for g in ev.pres.gens]
    dgens: list[ModElt] = []
    for i in range(len(gens)):
        der = formal_derivative(ev.pres, ev.pres.dgens[i])
        me: ModElt = {}
        for j, p in der.items():
            terms = ev.poly_to_terms(p)
            if push is not None:
                terms = push.apply(terms)
            if terms:
                _mod_add(me, j, terms)
        dgens.append(me)
    return FreeModulePresentation(base, gens, dgens)


@dataclass
class KaehlerModule:
    replacement: SemifreeReplacement
    presentation: FreeModulePresentation  # over the replacement algebra
    module: EvaluatedFreeModule


def kaehler(
    rep: SemifreeReplacement, degree_cutoff: int, weight_cutoff: int
) -> KaehlerModule:
    """Degree-one differentials of a semifree replacement, over itself."""
    pres = kaehler_presentation(rep.algebra)
    module = pres.evaluate(degree_cutoff, weight_cutoff)
    return KaehlerModule(rep, pres, module)


@dataclass
class CotangentComplex:
    replacement: SemifreeReplacement
    presentation: FreeModulePresentation  # over B
    module: EvaluatedFreeModule  # the cotangent complex of B over A, a B-module
    homology_table: dict[Bidegree, int]
    certified_degree: int


def cotangent_from_replacement(
    rep: SemifreeReplacement, degree_cutoff: int, weight_cutoff: int
) -> CotangentComplex:
    pres = kaehler_presentation(rep.algebra, push=rep.quasi_iso)
    module = pres.evaluate(degree_cutoff, weight_cutoff)
    h = Homology(module)
    cert = degree_cutoff - 1
    return CotangentComplex(rep, pres, module, h.table(cert), cert)


def cotangent_complex(
    f: CdgaMorphism,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    replacement: SemifreeReplacement | None = None,
    deadline: float | None = None,
) -> CotangentComplex:
    """Cotangent complex of B over A: differentials of a semifree replacement
    of f, coefficients base-changed to B."""
    rep = replacement or semifree_replacement(
        f, degree_cutoff, weight_cutoff, deadline=deadline
    )
    return cotangent_from_replacement(rep, degree_cutoff, weight_cutoff)


# ---------------------------------------------------------------------------
# relative cotangent complex (cofiber model)
# ---------------------------------------------------------------------------


@dataclass
class RelativeCotangent:
    module: DgModule  # cone of (L_A (x)_A B) -> L_B, over B
    absolute: CotangentComplex  # the cotangent complex of B over Q
    base_changed: EvaluatedFreeModule  # L_A (x)_A B
    comparison: ChainMap  # base_changed -> absolute.module
    from_absolute: ChainMap  # absolute.module -> module (cone inclusion)
    homology_table: dict[Bidegree, int]
    certified_degree: int


def relative_cotangent(
    f: CdgaMorphism,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    deadline: float | None = None,
) -> RelativeCotangent:
    """Cofiber model of the cotangent complex of a map: the replacement of B
    over Q is built by continuing a replacement of A, so the comparison map
    is a generator-subset inclusion and its cone is formed directly.
    """
    a, b = f.source, f.target
    ra = resolve_algebra(a, degree_cutoff, weight_cutoff, deadline=deadline)
    k = len(ra.presentation.gens)
    images_b = [f.apply(x) for x in ra.gen_images]
    rb = semifree_replacement(
        unit_morphism(b),
        degree_cutoff,
        weight_cutoff,
        start=(ra.presentation.gens, ra.presentation.dgens, images_b),
        deadline=deadline,
    )
    absolute = cotangent_from_replacement(rb, degree_cutoff, weight_cutoff)
    full = absolute.presentation
    prefix = FreeModulePresentation(b, full.gens[:k], full.dgens[:k])
    base_changed = prefix.evaluate(degree_cutoff, weight_cutoff)
    lb = absolute.module
    blocks = {}
    for p, items in base_changed.index.items():
        n_t = lb.dim(p)
        cols = []
        for tr in items:
            col = [Fraction(0)] * n_t
            pos = lb.position.get(tr)
            if pos is not None:
                col[pos[1]] = Fraction(1)
            cols.append(tuple(col))
        blocks[p] = Matrix.from_columns(n_t, cols)
    comparison = ChainMap(base_changed, lb, blocks, check=False, name="L(f)")
    c, incl, _proj = cone(comparison, check=False)
    h = Homology(c)
    cert = degree_cutoff - 1
    return RelativeCotangent(
        c, absolute, base_changed, comparison, incl, h.table(cert), cert
    )


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------


@dataclass
class Derivation:
    cotangent: CotangentComplex
    module: DgModule  # M, a module over B
    total: FiniteCdga  # B + M, square-zero
    projection: CdgaMorphism  # total -> B
    zero_section: CdgaMorphism  # B -> total
    section: CdgaMorphism  # replacement algebra -> total, lifting rho
    classifying_map: ChainMap  # cotangent module -> M


def _assert_blocks_equal(f: ChainMap, g: ChainMap, what: str):
    for p in set(f.source.basis) | set(g.source.basis):
        if f.block(p) != g.block(p):
            raise DgalgError(f"{what}: maps differ at piece {p}")


def derivation_from_map(
    cot: CotangentComplex, phi: ChainMap, *, check: bool = True
) -> Derivation:
    """The derivation whose classifying map is phi: L -> M.

    Its section sends each generator g of the replacement to
    (rho(g), phi(delta_g)) in the square-zero extension B + M.
    """
    if phi.source is not cot.module:
        raise ValueError("classifying map must start from the cotangent module")
    rep = cot.replacement
    b = rep.quasi_iso.target
    m = phi.target
    total, proj, zsect = trivial_square_zero(b, m, check=False)
    incl_m = module_inclusion_into_trivial(total, b, m)
    images = []
    for i in range(len(rep.presentation.gens)):
        bv = zsect.apply(rep.quasi_iso.apply(rep.algebra.generator_elt(i)))
        mv = incl_m.apply(phi.apply(cot.module.gen_elt(i)))
        images.append(t_add(bv, mv))
    section = morphism_from_images(
        rep.algebra,
        total,
        zsect.compose(rep.base_map),
        images,
        check=False,
        name="section",
    )
    if check:
        phi.check_chain()
        section.check_chain()
        _assert_blocks_equal(
            proj.compose(section), rep.quasi_iso, "projection of the section"
        )
    return Derivation(cot, m, total, proj, zsect, section, phi)


def read_back_classifying(der: Derivation) -> ChainMap:
    """Reconstruct the classifying map from the section's module component."""
    rep = der.cotangent.replacement
    b = rep.quasi_iso.target
    lmod = der.cotangent.module
    m = der.module
    w_parts: list[Terms] = []
    for i in range(len(rep.presentation.gens)):
        val = der.section.apply(rep.algebra.generator_elt(i))
        w: Terms = {}
        for p, v in val.items():
            mv = tuple(v[b.dim(p) :])
            if any(c != 0 for c in mv):
                w = t_add(w, t_single(p, mv))
        w_parts.append(w)
    blocks = {}
    for p, items in lmod.index.items():
        cols = []
        for (bp, bi, gi) in items:
            belt = b.basis_elt(bp, bi)
            img = m.act(belt, w_parts[gi])
            cols.append(img.get(p, zero_vec(m.dim(p))))
        blocks[p] = Matrix.from_columns(m.dim(p), cols)
    return ChainMap(lmod, m, blocks, check=False)


# ---------------------------------------------------------------------------
# the comparison map alpha: C_f (x)_A B -> L_f
# ---------------------------------------------------------------------------


@dataclass
class AlphaComparison:
    f: CdgaMorphism
    replacement: SemifreeReplacement
    cotangent: CotangentComplex
    pushout: Pushout
    source: DgModule  # cone of B -> B (x)_A B, a model of C_f (x)_A B
    alpha: ChainMap  # source -> cotangent complex (underlying complexes)
    derivation_section: CdgaMorphism  # d_eta: replacement -> B + L
    square: PullbackSquare  # the infinitesimal extension pullback
    f_prime: CdgaMorphism  # A -> pullback, the lifted comparison
    cofiber: DgModule  # cone of A -> replacement, a model of C_f
    alpha0: ChainMap  # cofiber -> cotangent complex
    to_extension: ChainMap  # cofiber -> source
    connectivity_n: int  # certified connectivity of f
    certified_degree: int


def alpha_map(
    f: CdgaMorphism,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    replacement: SemifreeReplacement | None = None,
    deadline: float | None = None,
) -> AlphaComparison:
    """Comparison map from the cofiber of f, base-changed to B, to the
    cotangent complex of f.

    Built from the universal derivation: its section d_eta into B + L is
    pulled back against the zero section (the infinitesimal extension of B by
    L), the canonical lift of A is produced by the lifting solver, and the
    connecting map of the resulting cone extracts the path coordinate.  The
    map on the base-changed cofiber is its B-linear extension.
    """
    rep = replacement or semifree_replacement(
        f, degree_cutoff, weight_cutoff, deadline=deadline
    )
    a, b = f.source, f.target
    ngens = len(rep.presentation.gens)
    cot = cotangent_from_replacement(rep, degree_cutoff, weight_cutoff)
    lmod = cot.module
    lq = underlying_complex(lmod)

    # the universal derivation's section d_eta: R -> B + L, g |-> (rho g, delta_g)
    total, _proj_t, zsect = trivial_square_zero(b, lmod, check=False)
    incl_m = module_inclusion_into_trivial(total, b, lmod)
    images = []
    for i in range(ngens):
        bv = zsect.apply(rep.quasi_iso.apply(rep.algebra.generator_elt(i)))
        mv = incl_m.apply(lmod.gen_elt(i))
        images.append(t_add(bv, mv))
    d_eta = morphism_from_images(
        rep.algebra, total, zsect.compose(rep.base_map), images,
        check=False, name="d_eta",
    )
    d_eta.check_chain()

    # the infinitesimal extension of B by L, as a homotopy pullback
    square = homotopy_pullback(d_eta, zsect, force_replace=True)
    e_alg, _eps, _q = square.path
    r_alg = rep.algebra

    # canonical base map A -> pullback: a |-> (iota(a), f(a) in the path object)
    iota = r_alg.base_inclusion()
    btp_blocks = {}
    for p in a.basis:
        n_r = r_alg.dim(p)
        n_e = e_alg.dim(p)
        cols = []
        for j in range(a.dim(p)):
            rv = iota.block(p).column(j)
            fv = f.block(p).column(j)
            target = list(rv) + list(fv) + [Fraction(0)] * (n_e - len(fv))
            cols.append(solve(square.incl.block(p), tuple(target)))
        btp_blocks[p] = Matrix.from_columns(square.algebra.dim(p), cols)
    btp = CdgaMorphism(a, square.algebra, btp_blocks, check=False)

    # the lift f': A -> pullback, produced and validated by the lifting solver
    x_triv = SemifreePresentation(a, [], [], check=False).evaluate(
        degree_cutoff, weight_cutoff, check=False
    )
    x_to_a = CdgaMorphism(
        x_triv, a, {p: Matrix.identity(a.dim(p)) for p in a.basis}, check=False
    )
    x_from_a = x_triv.base_inclusion()
    gamma = lift_along(
        square,
        x_triv,
        iota.compose(x_to_a),
        f.compose(x_to_a),
        {},
        base_to_pullback=btp,
    )
    f_prime = gamma.compose(x_from_a)

    # the derivation component of d_eta (its L-part), as a chain map R -> L
    rq = underlying_complex(r_alg)
    dhat_blocks = {}
    for p in r_alg.basis:
        blk = d_eta.block(p)
        nb = b.dim(p)
        dhat_blocks[p] = Matrix(
            lmod.dim(p), blk.ncols, [list(blk.rows[nb + i]) for i in range(lmod.dim(p))]
        )
    dhat = ChainMap(rq, lq, dhat_blocks, check=False, name="universal_derivation")
    dhat.check_chain()

    # theta: cone(pullback -> R) -> L, (p, r) |-> y(p) + dhat(r)
    kcone, _k_incl, _k_proj = cone(as_complex_map(square.to_b), check=False)
    theta_blocks = {}
    for (d, w) in kcone.basis:
        below = (d - 1, w)
        n_p = square.algebra.dim(below)
        n_r = r_alg.dim((d, w))
        n_t = lmod.dim((d, w))
        cols = []
        y_off = r_alg.dim(below) + b.dim(below) + lmod.dim(below)
        for j in range(n_p):
            col = square.incl.block(below).column(j)
            cols.append(tuple(col[y_off : y_off + n_t]))
        for j in range(n_r):
            cols.append(dhat.block((d, w)).column(j))
        theta_blocks[(d, w)] = Matrix.from_columns(n_t, cols)
    theta = ChainMap(kcone, lq, theta_blocks, check=False, name="theta")
    theta.check_chain()

    # cofiber of f and its map into the cone over the pullback
    ccone, _c_incl, _c_proj = cone(as_complex_map(iota), check=False)
    cmap_blocks = {}
    for (d, w) in ccone.basis:
        below = (d - 1, w)
        n_a = a.dim(below)
        n_r = r_alg.dim((d, w))
        mat = Matrix.zero(square.algebra.dim(below) + n_r, n_a + n_r)
        fp = f_prime.block(below)
        for j in range(n_a):
            for i, c in enumerate(fp.column(j)):
                mat.rows[i][j] = c
        for j in range(n_r):
            mat.rows[square.algebra.dim(below) + j][n_a + j] = Fraction(1)
        cmap_blocks[(d, w)] = mat
    cone_map = ChainMap(ccone, kcone, cmap_blocks, check=False)
    alpha0 = theta.compose(cone_map)
    alpha0.name = "alpha0"

    # base change: S = cone(B -> B (x)_A B) models C_f (x)_A B
    po = pushout(
        f, f, degree_cutoff, weight_cutoff, replacement=rep, deadline=deadline
    )
    s_cone, _s_incl, _s_proj = cone(as_complex_map(po.j2), check=False)
    alpha_blocks = {}
    for (d, w) in s_cone.basis:
        n_b1 = b.dim((d - 1, w))
        items = po.algebra.index.get((d, w), ())
        n_t = lmod.dim((d, w))
        cols = [zero_vec(n_t)] * n_b1
        for (bp, bi, mono) in items:
            r_elt = r_alg.poly_to_terms({mono: a.unit_elt()})
            val = dhat.apply(r_elt)
            belt = b.basis_elt(bp, bi)
            acted = lmod.act(belt, val)
            cols.append(acted.get((d, w), zero_vec(n_t)))
        alpha_blocks[(d, w)] = Matrix.from_columns(n_t, list(cols))
    alpha = ChainMap(s_cone, lq, alpha_blocks, check=False, name="alpha")
    alpha.check_chain()

    # the adjunction map C_f -> C_f (x)_A B and the strict compatibility
    can_blocks = {}
    for (d, w) in ccone.basis:
        below = (d - 1, w)
        n_a = a.dim(below)
        n_r = r_alg.dim((d, w))
        rows_total = b.dim(below) + po.algebra.dim((d, w))
        mat = Matrix.zero(rows_total, n_a + n_r)
        fb = f.block(below)
        for j in range(n_a):
            for i, c in enumerate(fb.column(j)):
                mat.rows[i][j] = c
        j1 = po.r_to_pushout.block((d, w))
        for j in range(n_r):
            for i, c in enumerate(j1.column(j)):
                mat.rows[b.dim(below) + i][n_a + j] = c
        can_blocks[(d, w)] = mat
    can = ChainMap(ccone, s_cone, can_blocks, check=False, name="can")
    _assert_blocks_equal(alpha.compose(can), alpha0, "alpha against its cofiber form")

    n = map_connectivity(f).connective
    return AlphaComparison(
        f, rep, cot, po, s_cone, alpha, d_eta, square, f_prime,
        ccone, alpha0, can, n, degree_cutoff - 1,
    )


def jacobian_alpha_blocks(ac: AlphaComparison) -> dict[Bidegree, Matrix]:
    """Independent matrix for the comparison map: fold the self-pushout back
    onto B and differentiate each monomial formally.  Test oracle only."""
    rep = ac.replacement
    po = ac.pushout
    lmod = ac.cotangent.module
    b = rep.quasi_iso.target
    images = [
        rep.quasi_iso.apply(rep.algebra.generator_elt(i))
        for i in range(len(rep.presentation.gens))
    ]
    mu = pushout_fold(po, b, CdgaMorphism.identity(b), images, check=False)
    blocks = {}
    for p in ac.source.basis:
        d, w = p
        n_b1 = b.dim((d - 1, w))
        items = po.algebra.index.get(p, ())
        n_t = lmod.dim(p)
        cols = [zero_vec(n_t)] * n_b1
        for (bp, bi, mono) in items:
            poly = {mono: t_single(bp, _basis_vec(b.dim(bp), bi))}
            der = formal_derivative(po.algebra.pres, poly)
            me: ModElt = {}
            for j, cp in der.items():
                terms = mu.apply(po.algebra.poly_to_terms(cp))
                if terms:
                    _mod_add(me, j, terms)
            cols.append(lmod.modelt_terms(me).get(p, zero_vec(n_t)))
        blocks[p] = Matrix.from_columns(n_t, list(cols))
    return blocks


# ---------------------------------------------------------------------------
# connectivity estimate and weak-equivalence criterion
# ---------------------------------------------------------------------------


@dataclass
class ConnectivityEstimateReport:
    map_name: str
    n: int  # certified connectivity of f
    bound: int  # the comparison map should be (2n+2)-connected
    checked_through: int  # min(bound - 1, certified fiber degree)
    complete: bool  # whether the full range fell inside the window
    status: str  # "pass" or "fail"
    first_failure: tuple | None  # (degree, weight, dim)
    fiber_table: dict[Bidegree, int]


def estimate_from_alpha(
    ac: AlphaComparison, alpha: ChainMap | None = None
) -> ConnectivityEstimateReport:
    """(2n+2)-connectedness of the comparison map: the homology of its fiber
    must vanish in degrees strictly below 2n + 2."""
    alpha = alpha if alpha is not None else ac.alpha
    fib = hofib_complex(alpha)
    h = Homology(fib)
    n = ac.connectivity_n
    bound = 2 * n + 2
    through = min(bound - 1, h.certified_degree)
    first = None
    for d in range(through + 1):
        for w in range(fib.weight_bound + 1):
            if h.dim(d, w):
                first = (d, w, h.dim(d, w))
                break
        if first:
            break
    return ConnectivityEstimateReport(
        ac.f.name or "f",
        n,
        bound,
        through,
        through >= bound - 1,
        "fail" if first else "pass",
        first,
        h.table(through),
    )


def check_connectivity_estimate(
    f: CdgaMorphism,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    replacement: SemifreeReplacement | None = None,
    deadline: float | None = None,
) -> ConnectivityEstimateReport:
    """For f of certified connectivity n, verify that the homotopy fiber of
    the comparison map has no homology in certified degrees below 2n + 2."""
    ac = alpha_map(
        f, degree_cutoff, weight_cutoff, replacement=replacement, deadline=deadline
    )
    return estimate_from_alpha(ac)


@dataclass
class WeakEquivalenceVerdict:
    map_name: str
    is_weak_equivalence: bool
    through_degree: int
    pi0_iso: bool
    cotangent_vanishes: bool
    first_obstruction: tuple | None  # (degree, weight, dim) in H(L_f)
    cotangent: CotangentComplex


def weak_equivalence_criterion(
    f: CdgaMorphism,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    deadline: float | None = None,
) -> WeakEquivalenceVerdict:
    """f is a weak equivalence through the window iff pi_0(f) is an
    isomorphism and the cotangent complex of f is acyclic there.

    The verdict is cross-checked against the direct homology comparison of f;
    a disagreement raises, as it would indicate a computational fault.
    """
    cot = cotangent_complex(f, degree_cutoff, weight_cutoff, deadline=deadline)
    through = cot.certified_degree - 1
    pi0_iso = is_homology_iso(f, 0)
    h = Homology(cot.module)
    first = None
    for d in range(cot.certified_degree + 1):
        for w in range(cot.module.weight_bound + 1):
            if h.dim(d, w):
                first = (d, w, h.dim(d, w))
                break
        if first:
            break
    vanishes = first is None
    verdict = pi0_iso and vanishes
    # cross-check against the direct homology comparison
    if verdict and not is_homology_iso(f, through):
        raise DgalgError("criterion passed but f is not a homology iso")
    if not pi0_iso and is_homology_iso(f, 0):
        raise DgalgError("pi_0 verdicts disagree")
    if pi0_iso and first is not None and is_homology_iso(f, first[0]):
        raise DgalgError(
            "cotangent obstruction found but f is a homology iso through it"
        )
    return WeakEquivalenceVerdict(
        f.name or "f", verdict, through, pi0_iso, vanishes, first, cot
    )
