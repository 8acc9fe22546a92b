import random

import pytest

from dgalg.cdga import (
    CdgaMorphism,
    ChainMap,
    DgModule,
    Homology,
    algebra_as_module,
    hofib,
    homology,
    is_homology_iso,
    q_module,
    shift,
    trivial_square_zero,
)
from dgalg.errors import NoSolution, UnsupportedDiagram
from dgalg.homotopy import (
    connectivity,
    derived_tensor,
    homotopy_between,
    homotopy_pullback,
    lift_along,
    map_connectivity,
    path_fibration_replacement,
    product_cdga,
    pushout,
    resolve_algebra,
    resolve_module,
    semifree_replacement,
    strict_pullback,
    unit_morphism,
)
from dgalg.linalg import Matrix
from dgalg.semifree import morphism_from_images, sym

from fixtures import (
    Q,
    dual_numbers,
    point_module,
    random_q_module,
    residue_field_module,
    truncated_polynomial_base,
)


# ---------------------------------------------------------------------------
# semifree replacement
# ---------------------------------------------------------------------------


def test_resolve_dual_numbers_is_koszul():
    b = dual_numbers(degree_bound=6, weight_bound=8)
    rep = resolve_algebra(b, 5, 6)
    assert is_homology_iso(rep.quasi_iso, rep.certified_degree)
    # first generator: the weight-1 variable in degree 0
    g0 = rep.presentation.gens[0]
    assert (g0.degree, g0.weight) == (0, 1)
    # second: the degree-1 class killing its square
    g1 = rep.presentation.gens[1]
    assert (g1.degree, g1.weight) == (1, 2)


def test_resolve_truncated_cubic():
    b = truncated_polynomial_base(3, degree_bound=5, weight_bound=8)
    rep = resolve_algebra(b, 4, 6)
    assert is_homology_iso(rep.quasi_iso, rep.certified_degree)
    # hypersurface: one polynomial generator in degree 0, one exterior in 1
    degs = sorted((g.degree, g.weight) for g in rep.presentation.gens[:2])
    assert degs == [(0, 1), (1, 3)]


def test_replacement_over_nontrivial_base():
    b = dual_numbers(degree_bound=6, weight_bound=8)
    qq = Q(degree_bound=6, weight_bound=8)
    aug = CdgaMorphism(
        b, qq, {(0, 0): Matrix.identity(1), (0, 1): Matrix.zero(0, 1)}
    )
    rep = semifree_replacement(aug, 4, 6)
    assert is_homology_iso(rep.quasi_iso, rep.certified_degree)
    # Tate resolution of a hypersurface quotient: an exterior generator in
    # degree 1 and a polynomial generator in degree 2 suffice
    degs = sorted((g.degree, g.weight) for g in rep.presentation.gens)
    assert degs == [(1, 1), (2, 2)]


# ---------------------------------------------------------------------------
# module resolutions and derived tensor
# ---------------------------------------------------------------------------


def test_resolve_residue_field_periodic():
    b = dual_numbers(degree_bound=8, weight_bound=8)
    m = residue_field_module(b)
    res = resolve_module(m, 6, 7)
    # one free generator per degree, of weight equal to the degree
    gens = sorted((g.degree, g.weight) for g in res.presentation.gens)
    assert gens == [(i, i) for i in range(7)]
    hp = Homology(res.module)
    hm = Homology(m)
    for d in range(res.certified_degree + 1):
        assert hp.dims_row(d) == hm.dims_row(d)


def test_tor_over_dual_numbers_periodic():
    b = dual_numbers(degree_bound=8, weight_bound=8)
    m = residue_field_module(b)
    t = derived_tensor(m, m, 6, 7)
    for i in range(t.certified_degree + 1):
        row = {w: n for (d, w), n in t.homology_table.items() if d == i}
        assert row == {i: 1}, i


def test_tor_sides_agree():
    b = truncated_polynomial_base(3, degree_bound=8, weight_bound=8)
    m = residue_field_module(b)
    left = derived_tensor(m, m, 5, 7, side="left")
    right = derived_tensor(m, m, 5, 7, side="right")
    assert left.homology_table == right.homology_table


def test_tensor_kunneth_over_q():
    rng = random.Random(42)
    for _ in range(5):
        m = random_q_module(rng)
        n = random_q_module(rng)
        t = derived_tensor(m, n, 4, 4)
        hm, hn = Homology(m), Homology(n)
        for d in range(t.certified_degree + 1):
            for w in range(5):
                expect = 0
                for d1 in range(d + 1):
                    for w1 in range(w + 1):
                        if d1 <= hm.certified_degree and d - d1 <= hn.certified_degree:
                            expect += hm.dim(d1, w1) * hn.dim(d - d1, w - w1)
                got = t.homology_table.get((d, w), 0)
                assert got == expect, (d, w)


# ---------------------------------------------------------------------------
# pushouts
# ---------------------------------------------------------------------------


def test_pushout_along_identity():
    b = dual_numbers(degree_bound=6, weight_bound=8)
    f = unit_morphism(b)
    g = CdgaMorphism.identity(f.source)
    po = pushout(f, g, 5, 6)
    h = homology(po.algebra)
    hb = homology(b)
    for d in range(po.certified_degree + 1):
        assert h.dims_row(d) == hb.dims_row(d)


def test_pushout_self_tensor_of_artin():
    # Q[s]/(s^2) (x)_Q Q[s]/(s^2): homology Q[s,t]/(s^2, t^2), finite
    b = dual_numbers(degree_bound=5, weight_bound=6)
    f = unit_morphism(b)
    po = pushout(f, f, 4, 4)
    h = homology(po.algebra)
    assert h.dim(0, 0) == 1
    assert h.dim(0, 1) == 2  # s (x) 1 and 1 (x) s
    assert h.dim(0, 2) == 1  # s (x) s
    assert h.total_dim(1) == 0


# ---------------------------------------------------------------------------
# products, path replacement, pullbacks
# ---------------------------------------------------------------------------


def test_product_cdga_checked():
    b = dual_numbers()
    prod, pr1, pr2 = product_cdga(b, b, check=True)
    pr1.check_multiplicative()
    assert prod.dim((0, 0)) == 2 and prod.dim((0, 1)) == 2


def test_path_replacement_axioms():
    # nontrivial base and module: all algebra axioms checked by construction
    b = truncated_polynomial_base(2, degree_bound=6, weight_bound=6)
    m = shift(algebra_as_module(b), 1)
    t, proj, sect = trivial_square_zero(b, m, check=True)
    e, eps, q = path_fibration_replacement(sect, check=True)
    eps.check_multiplicative()
    q.check_multiplicative()
    assert eps.is_surjective()
    assert is_homology_iso(q)


def test_path_replacement_requires_split_target():
    b = dual_numbers()
    qq = Q()
    with pytest.raises(UnsupportedDiagram):
        path_fibration_replacement(unit_morphism(b))


def test_strict_pullback_of_surjection():
    a3 = truncated_polynomial_base(3)
    a2 = truncated_polynomial_base(2)
    blocks = {
        (0, 0): Matrix.identity(1),
        (0, 1): Matrix.identity(1),
        (0, 2): Matrix.zero(0, 1),
    }
    f = CdgaMorphism(a3, a2, blocks)
    sq = homotopy_pullback(f, CdgaMorphism.identity(a2))
    assert sq.replaced == "none"
    assert is_homology_iso(sq.to_b)  # pulling back along the identity


def test_pullback_of_zero_sections_is_trivial_extension():
    # Q x^h_{Q + Q[1]} Q = Q + Q: the degree-1 coordinate loops down
    qq = Q(degree_bound=6, weight_bound=6)
    m = point_module(1)
    t, proj, sect = trivial_square_zero(qq, m)
    sq = homotopy_pullback(sect, sect, check=True)
    h = homology(sq.algebra)
    assert h.dim(0, 0) == 2
    assert h.total_dim(1) == 0
    assert h.total_dim(2) == 0


def test_pullback_matches_hofib():
    # pulling back the zero section along the unit of the total algebra
    # computes the homotopy fiber of the projection
    qq = Q(degree_bound=6, weight_bound=6)
    m = point_module(2)
    t, proj, sect = trivial_square_zero(qq, m)
    sq = homotopy_pullback(sect, sect)
    h = homology(sq.algebra)
    # Q x^h_{Q + Q[2]} Q: H_0 = Q, H_1 = Q (loop of the degree-2 class)
    assert h.dim(0, 0) == 1
    assert h.total_dim(1) == 1
    assert h.total_dim(2) == 0


# ---------------------------------------------------------------------------
# homotopies and lifting
# ---------------------------------------------------------------------------


def test_homotopy_between_chain_homotopic_maps():
    m = q_module({(0, 0): 1, (1, 0): 1}, {(1, 0): Matrix.identity(1)})
    # identity and zero on an acyclic complex are homotopic
    h = homotopy_between(ChainMap.identity(m), ChainMap(m, m, {}, check=False))
    assert h is not None


def test_homotopy_between_detects_failure():
    m = point_module(0)
    h = homotopy_between(ChainMap.identity(m), ChainMap(m, m, {}, check=False))
    assert h is None


def test_lift_along_zero_sections():
    qq = Q(degree_bound=6, weight_bound=6)
    m = point_module(1)
    t, proj, sect = trivial_square_zero(qq, m)
    sq = homotopy_pullback(sect, sect)
    x = sym(point_module(1), 5, 5)  # exterior algebra on one degree-1 class
    alpha = morphism_from_images(x, qq, CdgaMorphism.identity(qq), [{}], check=False)
    beta = alpha
    gamma = lift_along(sq, x, alpha, beta, {})
    # strictness over the B leg is verified inside lift_along; sanity-check
    # that gamma is a chain map into the pullback
    gamma.check_chain()


def test_lift_rejects_bad_witness():
    b = dual_numbers(degree_bound=6, weight_bound=6)
    m = point_module(1)
    t, proj, sect = trivial_square_zero(b, m_over(b))
    sq = homotopy_pullback(sect, sect)
    x = sym_over_q_poly_gen()
    e = b.basis_elt((0, 1), 0)
    alpha = morphism_from_images(x, b, unit_morphism(b), [e], check=False)
    beta = morphism_from_images(x, b, unit_morphism(b), [{}], check=False)
    with pytest.raises(NoSolution):
        lift_along(sq, x, alpha, beta, {})


def m_over(b):
    """A rank-one degree-1 module over a discrete base, positive parts acting
    by zero."""
    from dgalg.cdga import DgModule

    return DgModule(
        b,
        {(1, 0): ("x",)},
        {},
        {((0, 0), (1, 0)): Matrix.identity(1)},
        degree_bound=b.degree_bound,
        weight_bound=b.weight_bound,
        name="M",
    )


def sym_over_q_poly_gen():
    """Polynomial algebra on one degree-0 weight-1 generator."""
    return sym(point_module(0, weight=1), 5, 5)


# ---------------------------------------------------------------------------
# connectivity
# ---------------------------------------------------------------------------


def test_connectivity_of_point():
    r = connectivity(point_module(2))
    assert r.lowest_nonzero == 2
    assert r.connective == 2


def test_connectivity_of_acyclic():
    m = q_module({(0, 0): 1, (1, 0): 1}, {(1, 0): Matrix.identity(1)})
    r = connectivity(m)
    assert r.lowest_nonzero is None
    assert r.connective == r.certified_degree + 1


def test_map_connectivity_of_truncation():
    a3 = truncated_polynomial_base(3)
    a2 = truncated_polynomial_base(2)
    blocks = {
        (0, 0): Matrix.identity(1),
        (0, 1): Matrix.identity(1),
        (0, 2): Matrix.zero(0, 1),
    }
    f = CdgaMorphism(a3, a2, blocks)
    r = map_connectivity(f)
    assert r.lowest_nonzero == 0  # the fiber s^2 sits in degree 0


def test_map_connectivity_of_identity():
    m = point_module(0)
    r = map_connectivity(ChainMap.identity(m))
    assert r.lowest_nonzero is None
