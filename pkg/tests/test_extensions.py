import pytest

from fractions import Fraction

from dgalg.cdga import (
    CdgaMorphism,
    DgModule,
    Homology,
    hofib,
    is_homology_iso,
    shift,
    trivial_square_zero,
    truncate,
)
from dgalg.cotangent import cotangent_from_replacement, derivation_from_map
from dgalg.errors import (
    CutoffInsufficient,
    NotSquareZero,
    NotSubmodule,
    NotTruncated,
    SquareNotZero,
)
from dgalg.extensions import (
    classify_square_zero,
    classifying_from_values,
    cocycle_classifying_values,
    compare_extensions,
    infinitesimal_extension,
    lemma_lem_check,
    square_zero_extension,
    verify_square_zero,
)
from dgalg.homotopy import check_homotopy, resolve_algebra
from dgalg.semifree import Generator, SemifreePresentation
from dgalg.linalg import Matrix

from fixtures import Q, koszul_presentation, truncated_polynomial_base

D, W = 6, 8


def point_module_over(b, piece, name="M"):
    """Q concentrated in one bidegree, positive pieces of b acting by zero."""
    return DgModule(
        b,
        {piece: ("m",)},
        {},
        {((0, 0), piece): Matrix.identity(1)},
        degree_bound=b.degree_bound,
        weight_bound=b.weight_bound,
        name=name,
    )


def dual_base():
    return truncated_polynomial_base(2)


def cubic_base():
    return truncated_polynomial_base(3)


def scaled_derivation(b, c):
    """The derivation of Q[s]/(s^2) into Q[1] at weight 2 sending the
    degree-(1,2) chain of the resolution to c times the module generator."""
    r = resolve_algebra(b, D, W)
    cot = cotangent_from_replacement(r, D, W)
    m = point_module_over(b, (0, 2))
    m1 = shift(m, 1)
    values = []
    for g in r.presentation.gens:
        if (g.degree, g.weight) == (1, 2):
            values.append({(1, 2): (Fraction(c),)})
        else:
            values.append({})
    phi = classifying_from_values(cot, m1, values)
    phi.check_chain()
    return m, derivation_from_map(cot, phi)


def h0_square_nonzero(total):
    """Whether the weight-1 class of H_0 squares to a nonzero class."""
    h = Homology(total)
    s = h.rep_elt((0, 1), 0)
    sq = total.mul_elt(s, s)
    v = sq.get((0, 2))
    if v is None:
        return False
    return any(c != 0 for c in h.reduce((0, 2), v))


# ---------------------------------------------------------------------------
# infinitesimal extensions
# ---------------------------------------------------------------------------


def test_zero_derivation_gives_trivial_square_zero():
    b = dual_base()
    m, der = scaled_derivation(b, 0)
    ext = infinitesimal_extension(b, m, der, D, W)
    triv, _, _ = trivial_square_zero(b, m)
    assert Homology(ext.total).table(3) == Homology(triv).table(3)
    assert not h0_square_nonzero(ext.total)


def test_weight_two_derivation_realizes_cubic_relation():
    b = dual_base()
    m, der = scaled_derivation(b, 1)
    ext = infinitesimal_extension(b, m, der, D, W)
    assert Homology(ext.total).table(3) == {(0, 0): 1, (0, 1): 1, (0, 2): 1}
    # the total is the cubic algebra, not the trivial extension: s^2 != 0
    assert h0_square_nonzero(ext.total)


@pytest.mark.parametrize("c", [0, 1, 2, -3])
def test_fiber_of_projection_is_the_module(c):
    b = dual_base()
    m, der = scaled_derivation(b, c)
    ext = infinitesimal_extension(b, m, der, D, W)
    hf = Homology(ext.fiber)
    hm = Homology(m)
    for d in range(min(hf.certified_degree, hm.certified_degree) + 1):
        assert hf.dims_row(d) == hm.dims_row(d)
    assert is_homology_iso(ext.comparison)


def test_infinitesimal_extension_rejects_wrong_module():
    b = dual_base()
    _, der = scaled_derivation(b, 1)
    wrong = point_module_over(b, (0, 3))
    with pytest.raises(ValueError):
        infinitesimal_extension(b, wrong, der, D, W)


def test_infinitesimal_extension_cutoff_guard():
    b = dual_base()
    m, der = scaled_derivation(b, 1)
    with pytest.raises(CutoffInsufficient):
        infinitesimal_extension(b, m, der, 48, W)


# ---------------------------------------------------------------------------
# square-zero extensions: construction and verification
# ---------------------------------------------------------------------------


def cubic_extension():
    b1 = cubic_base()
    reps = [{(0, 2): (Fraction(1),)}]
    return square_zero_extension(Q(), b1, 0, reps, D, W), reps


def koszul_extension():
    ev = koszul_presentation(2).evaluate(D, W, check=False)
    b1, _ = truncate(ev, 1)
    h = Homology(b1)
    reps = [
        h.rep_elt((1, w), i)
        for w, k in sorted(h.dims_row(1).items())
        for i in range(k)
    ]
    return square_zero_extension(Q(), b1, 1, reps, D, W), reps


def test_empty_submodule_reproduces_the_source():
    b1 = dual_base()
    ext = square_zero_extension(Q(), b1, 0, [], D, W)
    h1, h0 = Homology(b1), Homology(ext.b0)
    for d in range(3):
        assert h0.dims_row(d) == h1.dims_row(d)
    assert is_homology_iso(ext.phi)
    assert ext.report.passed


def test_cubic_modulo_square_gives_dual_numbers():
    ext, _ = cubic_extension()
    assert Homology(ext.b0).table(2) == {(0, 0): 1, (0, 1): 1}
    assert ext.report.passed
    assert ext.report.conditions["i_square_zero"]


def test_koszul_level_one_extension():
    ext, _ = koszul_extension()
    h0 = Homology(ext.b0)
    assert h0.dims_row(0) == {0: 1, 1: 1}
    assert h0.dims_row(1) == {}
    assert ext.report.passed


def test_fiber_is_concentrated_i():
    for build in (cubic_extension, koszul_extension):
        ext, _ = build()
        fib = hofib(ext.phi)
        hf = Homology(fib)
        for d in range(hf.certified_degree + 1):
            if d == ext.n:
                assert hf.dims_row(d) == ext.i.dims
            else:
                assert hf.dims_row(d) == {}


def test_non_closed_submodule_rejected():
    b1 = cubic_base()
    with pytest.raises(NotSubmodule):
        square_zero_extension(Q(), b1, 0, [{(0, 1): (Fraction(1),)}], D, W)


def test_non_square_zero_ideal_rejected():
    b1 = truncated_polynomial_base(4)
    reps = [
        {(0, 1): (Fraction(1),)},
        {(0, 2): (Fraction(1),)},
        {(0, 3): (Fraction(1),)},
    ]
    with pytest.raises(SquareNotZero):
        square_zero_extension(Q(), b1, 0, reps, D, W)


def test_untruncated_source_rejected():
    # a free even generator has homology in every even degree
    pres = SemifreePresentation(Q(), [Generator("x", 2, 1)], [{}])
    ev = pres.evaluate(D, W, check=False)
    with pytest.raises(NotTruncated):
        square_zero_extension(Q(), ev, 1, [], D, W)


def test_verify_identity_with_zero_submodule():
    b = dual_base()
    ident = CdgaMorphism.identity(b)
    report = verify_square_zero(ident, 0, [])
    assert report.passed


def test_verify_negative_control_equivalence_fails():
    b1 = dual_base()
    aug = CdgaMorphism(b1, Q(), {(0, 0): Matrix.identity(1)}, check=False)
    aug.check_chain()
    report = verify_square_zero(aug, 1, [])
    assert not report.passed
    assert "equivalence_below_n" in report.failing()


# ---------------------------------------------------------------------------
# comparison of extensions
# ---------------------------------------------------------------------------


def test_compare_extension_with_itself():
    ext, reps = cubic_extension()
    cmp = compare_extensions(ext.phi, ext.phi, 0, reps, D, W)
    assert cmp.verdict


def test_compare_with_independent_presentation():
    ext, reps = cubic_extension()
    b0p = dual_base()
    blocks = {
        (0, 0): Matrix.identity(1),
        (0, 1): Matrix.identity(1),
        (0, 2): Matrix.zero(0, 1),
    }
    direct = CdgaMorphism(ext.b1, b0p, blocks, check=False)
    direct.check_chain()
    cmp = compare_extensions(ext.phi, direct, 0, reps, D, W)
    assert cmp.verdict
    assert is_homology_iso(cmp.to_first) and is_homology_iso(cmp.to_second)


def test_compare_rejects_mismatched_submodule():
    ext, _ = cubic_extension()
    with pytest.raises(NotSquareZero):
        compare_extensions(ext.phi, ext.phi, 0, [], D, W)


# ---------------------------------------------------------------------------
# the base-change lemma
# ---------------------------------------------------------------------------


def test_lemma_check_zero_submodule():
    b1 = dual_base()
    ext = square_zero_extension(Q(), b1, 0, [], D, W)
    report = lemma_lem_check(ext, D, W)
    assert report.matched
    h0 = Homology(ext.b0)
    expected = {
        (d, w): k
        for d in range(report.through_degree + 1)
        for w, k in h0.dims_row(d).items()
    }
    assert report.lhs_table == expected


def test_lemma_check_cubic():
    ext, _ = cubic_extension()
    report = lemma_lem_check(ext, D, W)
    assert report.matched
    # free algebra over Q[s]/(s^2) on one odd degree-1 weight-2 class
    assert report.lhs_table == {
        (0, 0): 1,
        (0, 1): 1,
        (1, 2): 1,
        (1, 3): 1,
    }


def test_lemma_check_koszul():
    ext, _ = koszul_extension()
    report = lemma_lem_check(ext, D, W)
    assert report.matched
    # free algebra over Q[t]/(t^2) on one even degree-2 class of weight 2:
    # polynomial pattern t^a (class)^k
    assert report.lhs_table == {
        (0, 0): 1,
        (0, 1): 1,
        (2, 2): 1,
        (2, 3): 2,
        (2, 4): 1,
        (4, 4): 1,
        (4, 5): 2,
        (4, 6): 2,
        (4, 7): 1,
    }


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def test_classify_trivial_extension_gives_zero_derivation():
    b0 = dual_base()
    m = point_module_over(b0, (0, 3))
    total, _, _ = trivial_square_zero(b0, m)
    ext = square_zero_extension(
        Q(), total, 0, [{(0, 3): (Fraction(1),)}], D, W
    )
    cl = classify_square_zero(ext, D, W)
    assert all(
        blk.is_zero() for blk in cl.derivation.classifying_map.blocks.values()
    )
    assert cl.round_trip_ok and cl.alpha_iso


def test_classify_cubic_recovers_the_derivation():
    ext, _ = cubic_extension()
    cl = classify_square_zero(ext, D, W)
    assert cl.route == "tensor"
    assert cl.theta_iso_through == 1
    assert cl.splitting_ok
    assert cl.round_trip_ok and cl.alpha_iso
    total = cl.extension.total
    assert Homology(total).table(2) == {(0, 0): 1, (0, 1): 1, (0, 2): 1}
    # the recovered total carries the cubic relation, not the trivial one
    assert h0_square_nonzero(total)


def test_classify_koszul_extension():
    ext, _ = koszul_extension()
    cl = classify_square_zero(ext, D, W)
    assert cl.route == "tensor"
    assert cl.theta_iso_through == 2
    assert cl.splitting_ok
    assert cl.round_trip_ok and cl.alpha_iso


def test_classify_splitting_dimensions():
    ext, _ = cubic_extension()
    cl = classify_square_zero(ext, D, W)
    h_self = Homology(cl.po_self.algebra)
    h_b0 = Homology(ext.b0)
    assert h_self.dims_row(0) == h_b0.dims_row(0)
    # degree n+1: one class per basis class of I, on top of H_{n+1}(B0) = 0
    assert h_self.dims_row(1) == {2: 1}


def test_classify_tensor_and_cocycle_routes_agree():
    ext, _ = cubic_extension()
    cl = classify_square_zero(ext, D, W)
    r0 = cl.derivation.cotangent.replacement
    oracle = cocycle_classifying_values(ext, r0)
    rebuilt = classifying_from_values(
        cl.derivation.cotangent, cl.derivation.module, oracle
    )
    for p, blk in cl.derivation.classifying_map.blocks.items():
        assert rebuilt.block(p) == blk


def test_classify_equalizer_homotopy_is_valid():
    ext, _ = cubic_extension()
    cl = classify_square_zero(ext, D, W)
    beta = ext.phi.compose(cl.alpha_replacement.quasi_iso)
    f0 = cl.derivation.section.compose(cl.alpha_lift)
    f1 = cl.derivation.zero_section.compose(beta)
    assert check_homotopy(f0, f1, cl.equalizer_homotopy)


def test_classify_cutoff_guard():
    ext, _ = koszul_extension()
    with pytest.raises(CutoffInsufficient):
        classify_square_zero(ext, 3, W)
