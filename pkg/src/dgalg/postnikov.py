"""Postnikov towers, square-zero verification of their stages, k-invariants.

The tower of a connective algebra A is the sequence of truncations A<=n with
strict stage maps p_n: A<=n -> A<=n-1.  Each stage is a square-zero extension
by H_n(A)[n]; the classifying derivation of stage n is the n-th k-invariant,
and the homotopy pullback along it reproduces A<=n.  The module also verifies
the deformation-theoretic square attached to a discrete artinian square-zero
extension A' -> A: the homotopy pullback of A -> Q + I[1] <- Q recovers A'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .cdga import (
    Bidegree,
    CdgaMorphism,
    ChainMap,
    DgModule,
    FiniteCdga,
    Homology,
    Terms,
    induced_on_homology,
    q_algebra,
    q_module,
    trivial_square_zero,
    truncate,
)
from .errors import (
    CutoffInsufficient,
    DgalgError,
    NotSquareZero,
    UnsupportedDiagram,
)
from .extensions import (
    Classification,
    ExtensionComparison,
    SquareZeroExtension,
    SquareZeroReport,
    classify_square_zero,
    compare_extensions,
    square_zero_extension,
    verify_square_zero,
)
from .homotopy import PullbackSquare, homotopy_between, homotopy_pullback
from .linalg import Matrix, kernel_basis
from .semifree import SemifreePresentation

UNIQUENESS_NOTE = (
    "uniqueness is certified as: independent extraction runs produce "
    "classifying maps equal on homology; homotopy uniqueness of the "
    "underlying class is not decided at this level"
)


# ---------------------------------------------------------------------------
# the tower
# ---------------------------------------------------------------------------


@dataclass
class PostnikovStage:
    n: int
    algebra: FiniteCdga  # A<=n
    projection: CdgaMorphism  # A -> A<=n
    p: CdgaMorphism | None  # A<=n -> A<=n-1; None at the bottom stage
    reps: list[Terms]  # cycles spanning H_n(A<=n) = H_n(A)
    report: SquareZeroReport | None  # square-zero verification of p
    # filled lazily by stage_check / k_invariant:
    extension: SquareZeroExtension | None = None
    k: "KInvariant | None" = None


@dataclass
class PostnikovTower:
    source: FiniteCdga
    top: int
    stages: list[PostnikovStage]
    certified_degree: int

    def stage(self, n: int) -> PostnikovStage:
        if not 0 <= n <= self.top:
            raise ValueError(f"tower has stages 0..{self.top}, asked for {n}")
        return self.stages[n]


def _dims_rows_equal(h1: Homology, h2: Homology, through: int) -> bool:
    top = min(through, h1.certified_degree, h2.certified_degree)
    return all(h1.dims_row(d) == h2.dims_row(d) for d in range(top + 1))


def tower(
    a: FiniteCdga | SemifreePresentation,
    top: int,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    check: bool = True,
) -> PostnikovTower:
    """The Postnikov tower A<=0, ..., A<=top with strict stage maps."""
    if isinstance(a, SemifreePresentation):
        a = a.evaluate(degree_cutoff, weight_cutoff, check=False)
    if degree_cutoff < top + 2:
        raise CutoffInsufficient(
            f"a tower through stage {top} needs a degree cutoff of at least {top + 2}"
        )
    if a.degree_bound < top + 1:
        raise CutoffInsufficient(
            f"source algebra only carries degrees through {a.degree_bound}"
        )
    h = Homology(a)
    if h.certified_degree < top:
        raise CutoffInsufficient(
            f"source homology is certified only through degree {h.certified_degree}"
        )
    stages: list[PostnikovStage] = []
    cert = h.certified_degree
    for n in range(top + 1):
        alg, proj = truncate(a, n, check=check)
        hn = Homology(alg)
        cert = min(cert, hn.certified_degree)
        if check:
            for i in range(min(n, h.certified_degree, hn.certified_degree) + 1):
                if hn.dims_row(i) != h.dims_row(i):
                    raise DgalgError(
                        f"truncation at {n} altered homology in degree {i}"
                    )
            for i in range(n + 1, hn.certified_degree + 1):
                if hn.dims_row(i):
                    raise DgalgError(
                        f"truncation at {n} left homology in degree {i}"
                    )
        reps = [
            hn.rep_elt((n, w), i)
            for w, k in sorted(hn.dims_row(n).items())
            for i in range(k)
        ]
        p = None
        report = None
        if n >= 1:
            prev = stages[n - 1]
            # below degree n the truncation leaves pieces untouched, so the
            # projection to the previous stage restricts to a strict map
            blocks = {
                piece: prev.projection.block(piece)
                for piece in alg.basis
                if piece[0] <= n - 1 and piece in prev.algebra.basis
            }
            p = CdgaMorphism(alg, prev.algebra, blocks, check=check, name=f"p{n}")
            if check:
                comp = p.compose(proj)
                for piece in a.basis:
                    if comp.block(piece) != prev.projection.block(piece):
                        raise DgalgError(
                            f"stage map does not factor the projection at {piece}"
                        )
            report = verify_square_zero(p, n, reps)
        stages.append(PostnikovStage(n, alg, proj, p, reps, report))
    return PostnikovTower(a, top, stages, cert)


def _stage_extension(
    tw: PostnikovTower, n: int, degree_cutoff: int, weight_cutoff: int
) -> SquareZeroExtension:
    stage = tw.stage(n)
    if n < 1:
        raise ValueError("stage 0 has no square-zero structure to rebuild")
    if stage.extension is None:
        base = q_algebra(stage.algebra.degree_bound, stage.algebra.weight_bound)
        stage.extension = square_zero_extension(
            base, stage.algebra, n, stage.reps, degree_cutoff, weight_cutoff
        )
    return stage.extension


# ---------------------------------------------------------------------------
# independent rebuild of a stage
# ---------------------------------------------------------------------------


@dataclass
class StageReport:
    n: int
    extension: SquareZeroExtension
    truncation_matched: bool  # H(rebuilt quotient) = H(A<=n-1)
    table_expected: dict[int, dict[int, int]]  # per degree q <= n
    table_actual: dict[int, dict[int, int]]
    table_matched: bool

    @property
    def passed(self) -> bool:
        return self.truncation_matched and self.table_matched


def stage_check(
    tw: PostnikovTower,
    n: int,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    extension: SquareZeroExtension | None = None,
) -> StageReport:
    """Rebuild stage n by attaching cells to A<=n and compare with A<=n-1.

    The cell attachment is the pushout killing H_n; its homology must agree
    with A<=n in degrees below n and vanish in degree n, and its truncation
    must have the homology of A<=n-1.
    """
    stage = tw.stage(n)
    if extension is None:
        extension = _stage_extension(tw, n, degree_cutoff, weight_cutoff)
    prev = tw.stage(n - 1)
    h_prev = Homology(prev.algebra)
    h_b0 = Homology(extension.b0)
    truncation_matched = _dims_rows_equal(
        h_prev, h_b0, min(h_prev.certified_degree, h_b0.certified_degree)
    )
    h_n = Homology(stage.algebra)
    h_aux = Homology(extension.aux)
    expected: dict[int, dict[int, int]] = {}
    actual: dict[int, dict[int, int]] = {}
    through = min(n, h_aux.certified_degree)
    for q in range(through + 1):
        expected[q] = {} if q == n else dict(h_n.dims_row(q))
        actual[q] = dict(h_aux.dims_row(q))
    table_matched = expected == actual and through == n
    return StageReport(n, extension, truncation_matched, expected, actual, table_matched)


# ---------------------------------------------------------------------------
# k-invariants
# ---------------------------------------------------------------------------


@dataclass
class KInvariant:
    n: int
    extension: SquareZeroExtension
    classification: Classification
    induced: dict[Bidegree, Matrix]  # classifying map on homology
    homology_zero: bool
    null_homotopy: dict[Bidegree, Matrix] | None
    pullback_ok: bool  # pullback along d_n reproduces H(A<=n)
    homology_trivial: bool
    uniqueness_note: str = field(default=UNIQUENESS_NOTE)

    @property
    def derivation(self):
        return self.classification.derivation


def k_invariant(
    tw: PostnikovTower,
    n: int,
    degree_cutoff: int,
    weight_cutoff: int,
    *,
    extension: SquareZeroExtension | None = None,
) -> KInvariant:
    """The derivation classifying stage n, with the pullback verification."""
    stage = tw.stage(n)
    if n < 1:
        raise ValueError("k-invariants start at stage 1")
    if stage.report is not None and not stage.report.passed:
        raise NotSquareZero(
            f"stage {n} failed square-zero verification: {stage.report.failing()}"
        )
    if extension is None:
        extension = _stage_extension(tw, n, degree_cutoff, weight_cutoff)
    cl = classify_square_zero(extension, degree_cutoff, weight_cutoff)
    phi_d = cl.derivation.classifying_map
    induced = induced_on_homology(phi_d)
    homology_zero = all(m.is_zero() for m in induced.values())
    null = None
    if homology_zero:
        zero = ChainMap(phi_d.source, phi_d.target, {}, check=False)
        null = homotopy_between(phi_d, zero)
    pullback_ok = cl.round_trip_ok and cl.alpha_iso
    trivial = homology_zero and null is not None and pullback_ok
    k = KInvariant(
        n, extension, cl, induced, homology_zero, null, pullback_ok, trivial
    )
    stage.k = k
    return k


# ---------------------------------------------------------------------------
# the artinian deformation square
# ---------------------------------------------------------------------------


@dataclass
class DeformationSquare:
    f: CdgaMorphism  # A' -> A, the given extension
    extension: SquareZeroExtension  # rebuilt model with quotient B0 ~ A
    comparison: ExtensionComparison  # B0 against the given A
    classification: Classification
    qi: FiniteCdga  # Q + I[1]
    pi: CdgaMorphism  # (B0 + I[1]) -> Q + I[1], augmentation on the first leg
    square: PullbackSquare  # holim(A -> Q + I[1] <- Q)
    table: dict[Bidegree, int]  # homology of the pullback corner
    matched: bool  # ... equals the homology of A'

    @property
    def passed(self) -> bool:
        return self.comparison.verdict and self.matched


def _kernel_reps(f: CdgaMorphism) -> list[Terms]:
    reps: list[Terms] = []
    for p in sorted(f.source.basis):
        ns = f.source.dim(p)
        if f.target.dim(p) == 0:
            kb = Matrix.identity(ns)
        else:
            kb = kernel_basis(f.block(p))
        for j in range(kb.ncols):
            reps.append({p: kb.column(j)})
    return reps


def artinian_deformation_square(
    f: CdgaMorphism, degree_cutoff: int, weight_cutoff: int
) -> DeformationSquare:
    """Verify the deformation square of a discrete artinian extension A' -> A.

    Produces the classifying derivation d: A -> A + I[1] and checks that the
    homotopy pullback of A -> Q + I[1] <- Q (first leg the augmentation of the
    derivation, second leg the unit) has the homology of A'.
    """
    aprime, a0 = f.source, f.target
    for alg, label in ((aprime, "source"), (a0, "target")):
        if any(p[0] != 0 for p in alg.basis):
            raise ValueError(f"{label} is not a discrete algebra")
        if alg.aug is None:
            raise ValueError(f"{label} carries no augmentation")
    reps = _kernel_reps(f)
    report = verify_square_zero(f, 0, reps)
    if not report.passed:
        raise NotSquareZero(
            f"the given map is not a square-zero extension: {report.failing()}"
        )
    base = q_algebra(aprime.degree_bound, aprime.weight_bound)
    ext = square_zero_extension(
        base, aprime, 0, reps, degree_cutoff, weight_cutoff
    )
    comparison = compare_extensions(f, ext.phi, 0, reps, degree_cutoff, weight_cutoff)
    cl = classify_square_zero(ext, degree_cutoff, weight_cutoff)
    der = cl.derivation

    qa = q_algebra(aprime.degree_bound, aprime.weight_bound)
    m_i = q_module(
        {(1, w): k for w, k in sorted(ext.i.dims.items()) if k},
        over=qa,
        name="I[1]",
    )
    qi, _, unit_section = trivial_square_zero(qa, m_i)
    pi = _augment_first_leg(der.total, ext.b0, qi)
    f_leg = pi.compose(der.section)
    square = homotopy_pullback(f_leg, unit_section, check=False)
    hp = Homology(square.algebra)
    ha = Homology(aprime)
    matched = _dims_rows_equal(hp, ha, min(hp.certified_degree, ha.certified_degree))
    table = {
        (d, w): k
        for d in range(hp.certified_degree + 1)
        for w, k in sorted(hp.dims_row(d).items())
    }
    return DeformationSquare(
        f, ext, comparison, cl, qi, pi, square, table, matched
    )


def _augment_first_leg(
    total: FiniteCdga, b0: FiniteCdga, qi: FiniteCdga
) -> CdgaMorphism:
    """(B0 + I[1]) -> (Q + I[1]): the augmentation of B0 on the first summand,
    the identity on I[1]."""
    if b0.aug is None:
        raise UnsupportedDiagram("the quotient model carries no augmentation")
    split = getattr(total, "_split", None)
    if split is None:
        raise UnsupportedDiagram("the derivation total is not a split extension")
    b_dims = split[0]
    blocks: dict[Bidegree, Matrix] = {}
    for p in total.basis:
        d, w = p
        nt = qi.dim(p)
        if nt == 0:
            continue
        nb = b_dims.get(p, total.dim(p))
        nm = total.dim(p) - nb
        if d == 0 and w == 0:
            row = list(b0.aug.rows[0]) + [Fraction(0)] * nm
            blocks[p] = Matrix(1, len(row), [row])
        elif d == 1:
            mat = Matrix.zero(nt, nb + nm)
            for j in range(min(nt, nm)):
                mat.rows[j][nb + j] = Fraction(1)
            blocks[p] = mat
    try:
        return CdgaMorphism(total, qi, blocks, check=True, name="pi")
    except DgalgError as exc:
        raise UnsupportedDiagram(
            "the augmentation ideal acts nontrivially on I; the reduced "
            "square is outside the implemented regime"
        ) from exc
