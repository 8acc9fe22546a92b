import dataclasses

import pytest

from dgalg.cdga import (
    CdgaMorphism,
    Homology,
    q_module,
    trivial_square_zero,
    truncate,
)
from dgalg.errors import CutoffInsufficient, NotSquareZero
from dgalg.linalg import Matrix
from dgalg.postnikov import (
    artinian_deformation_square,
    k_invariant,
    stage_check,
    tower,
)

from fixtures import Q, koszul_presentation, truncated_polynomial_base

D, W = 6, 8


def line_tower():
    """A = Q + Q[1] with the trivial product."""
    qa = Q()
    m = q_module({(1, 1): 1}, over=qa, name="Q[1]")
    total, _, _ = trivial_square_zero(qa, m)
    return tower(total, 1, D, W)


def koszul_tower():
    ev = koszul_presentation(2).evaluate(D, W, check=False)
    a, _ = truncate(ev, 1)
    return tower(a, 1, D, W)


def quotient_map(order_src, order_tgt):
    b1 = truncated_polynomial_base(order_src)
    b0 = truncated_polynomial_base(order_tgt) if order_tgt > 1 else Q()
    blocks = {}
    for w in range(order_src):
        if w < order_tgt:
            blocks[(0, w)] = Matrix.identity(1)
        else:
            blocks[(0, w)] = Matrix.zero(0, 1)
    f = CdgaMorphism(b1, b0, blocks, check=False)
    f.check_chain()
    return f


# ---------------------------------------------------------------------------
# towers
# ---------------------------------------------------------------------------


def test_tower_of_the_point():
    tw = tower(Q(), 2, D, W)
    for st in tw.stages:
        assert Homology(st.algebra).table(3) == {(0, 0): 1}
        if st.n >= 1:
            assert st.report is not None and st.report.passed
        else:
            assert st.report is None and st.p is None


def test_tower_of_split_line():
    tw = line_tower()
    assert Homology(tw.stage(0).algebra).table(2) == {(0, 0): 1}
    assert Homology(tw.stage(1).algebra).table(2) == {(0, 0): 1, (1, 1): 1}
    assert tw.stage(1).report.passed


def test_koszul_tower_stages():
    tw = koszul_tower()
    h0 = Homology(tw.stage(0).algebra)
    assert h0.dims_row(0) == {0: 1, 1: 1}
    assert h0.dims_row(1) == {}
    h1 = Homology(tw.stage(1).algebra)
    assert h1.dims_row(0) == {0: 1, 1: 1}
    assert h1.dims_row(1) == {2: 1, 3: 1}
    assert tw.stage(1).report.passed


def test_tower_truncation_coherence():
    tw = koszul_tower()
    re_trunc, _ = truncate(tw.stage(1).algebra, 0)
    h_re = Homology(re_trunc)
    h_0 = Homology(tw.stage(0).algebra)
    for d in range(min(h_re.certified_degree, h_0.certified_degree) + 1):
        assert h_re.dims_row(d) == h_0.dims_row(d)


def test_stage_maps_compose_with_projections():
    tw = koszul_tower()
    comp = tw.stage(1).p.compose(tw.stage(1).projection)
    for p in tw.source.basis:
        assert comp.block(p) == tw.stage(0).projection.block(p)


def test_tower_cutoff_guard():
    tw_src = koszul_tower().source
    with pytest.raises(CutoffInsufficient):
        tower(tw_src, 1, 2, W)


# ---------------------------------------------------------------------------
# independent stage rebuild
# ---------------------------------------------------------------------------


def test_stage_check_trivial_homology():
    tw = tower(Q(), 2, D, W)
    report = stage_check(tw, 1, D, W)
    assert report.passed
    assert report.table_expected == {0: {0: 1}, 1: {}}


def test_stage_check_koszul_table():
    tw = koszul_tower()
    report = stage_check(tw, 1, D, W)
    assert report.passed
    assert report.table_expected == {0: {0: 1, 1: 1}, 1: {}}
    assert report.table_actual == report.table_expected


def test_stage_check_detects_corruption():
    tw = koszul_tower()
    ext = stage_check(tw, 1, D, W).extension
    # a cell attachment that failed to kill H_1 must be flagged
    bad = dataclasses.replace(ext, aux=tw.stage(1).algebra)
    report = stage_check(tw, 1, D, W, extension=bad)
    assert not report.table_matched and not report.passed
    # a quotient with the wrong homology must be flagged
    bad2 = dataclasses.replace(ext, b0=tw.stage(1).algebra)
    report2 = stage_check(tw, 1, D, W, extension=bad2)
    assert not report2.truncation_matched and not report2.passed


# ---------------------------------------------------------------------------
# k-invariants
# ---------------------------------------------------------------------------


def test_k_invariant_of_split_line_is_trivial():
    tw = line_tower()
    ki = k_invariant(tw, 1, D, W)
    assert ki.homology_zero
    assert ki.null_homotopy is not None
    assert ki.pullback_ok
    assert ki.homology_trivial


def test_k_invariant_koszul_pullback_matches():
    tw = koszul_tower()
    ki = k_invariant(tw, 1, D, W)
    assert ki.pullback_ok
    h_total = Homology(ki.classification.extension.total)
    h_stage = Homology(tw.stage(1).algebra)
    for d in range(2):
        assert h_total.dims_row(d) == h_stage.dims_row(d)


def test_k_invariant_extraction_is_reproducible():
    tw = koszul_tower()
    ki1 = k_invariant(tw, 1, D, W)
    st = tw.stage(1)
    from dgalg.extensions import square_zero_extension
    from dgalg.cdga import q_algebra

    ext2 = square_zero_extension(
        q_algebra(st.algebra.degree_bound, st.algebra.weight_bound),
        st.algebra,
        1,
        st.reps,
        D,
        W,
    )
    ki2 = k_invariant(tw, 1, D, W, extension=ext2)
    assert ki1.induced == ki2.induced


def test_k_invariant_rejects_stage_zero():
    tw = line_tower()
    with pytest.raises(ValueError):
        k_invariant(tw, 0, D, W)


# ---------------------------------------------------------------------------
# artinian deformation squares
# ---------------------------------------------------------------------------


def test_deformation_square_cubic():
    ds = artinian_deformation_square(quotient_map(3, 2), D, W)
    assert ds.passed
    # the pullback corner is the cubic algebra: one dimension in each of the
    # weights 0, 1, 2
    assert ds.table == {(0, 0): 1, (0, 1): 1, (0, 2): 1}


def test_deformation_square_dual_numbers():
    ds = artinian_deformation_square(quotient_map(2, 1), D, W)
    assert ds.passed
    assert ds.table == {(0, 0): 1, (0, 1): 1}


def test_deformation_square_degenerate():
    b = truncated_polynomial_base(2)
    ds = artinian_deformation_square(CdgaMorphism.identity(b), D, W)
    assert ds.passed
    assert ds.table == {(0, 0): 1, (0, 1): 1}


def test_deformation_square_rejects_non_square_zero():
    # the kernel of Q[s]/(s^4) -> Q contains s with s * s != 0
    with pytest.raises(NotSquareZero):
        artinian_deformation_square(quotient_map(4, 1), D, W)


def test_deformation_square_rejects_non_discrete():
    qa = Q()
    m = q_module({(1, 1): 1}, over=qa)
    total, _, _ = trivial_square_zero(qa, m)
    with pytest.raises(ValueError):
        artinian_deformation_square(CdgaMorphism.identity(total), D, W)
