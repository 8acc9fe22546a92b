import pytest

from dgalg.cdga import homology, pi0, q_module, truncate
from dgalg.errors import DgalgError, InfinitePiece
from dgalg.semifree import (
    Generator,
    SemifreePresentation,
    sym,
    sym_power_complex,
    sym_presentation,
)

from fixtures import Q, exterior_presentation, koszul_presentation, point_module


def test_trivial_presentation_is_q():
    pres = SemifreePresentation(Q(), [], [])
    a = pres.evaluate(4, 4)
    assert a.total_dim() == 1
    assert homology(a).dim(0, 0) == 1


def test_exterior_generator():
    a = exterior_presentation().evaluate(4, 4)
    assert a.dim((0, 0)) == 1
    assert a.dim((1, 1)) == 1
    # y^2 = 0: no piece in degree 2
    assert a.dim((2, 2)) == 0
    h = homology(a)
    assert h.dim(0, 0) == 1 and h.dim(1, 1) == 1


def test_koszul_monomial_dims():
    a = koszul_presentation().evaluate(3, 6)
    # piece (1, 3) is spanned by t*y
    assert a.dim((1, 3)) == 1
    # degree 0: t^k for weight k
    for k in range(0, 7):
        assert a.dim((0, k)) == 1
    assert a.dim((1, 2)) == 1  # y


def test_koszul_homology_is_dual_numbers():
    a = koszul_presentation().evaluate(4, 6)
    h = homology(a)
    assert h.dim(0, 0) == 1
    assert h.dim(0, 1) == 1
    for w in range(2, 7):
        assert h.dim(0, w) == 0
    for d in range(1, h.certified_degree + 1):
        assert h.total_dim(d) == 0


def test_koszul_pi0():
    a = koszul_presentation().evaluate(4, 6)
    p = pi0(a)
    assert p.dims_table() == {(0, 0): 1, (0, 1): 1}
    t = p.basis_elt((0, 1), 0)
    assert p.mul_elt(t, t) == {}  # t^2 = 0 in H_0


def test_two_koszul_generators_truncation():
    a = koszul_presentation(2).evaluate(4, 8)
    t, _ = truncate(a, 0)
    h = homology(t)
    assert h.dim(0, 0) == 1 and h.dim(0, 1) == 1
    assert sum(h.total_dim(d) for d in range(1, h.certified_degree + 1)) == 0


def test_infinite_piece_detected():
    pres = SemifreePresentation(Q(), [Generator("x", 0, 0)], [{}])
    with pytest.raises(InfinitePiece):
        pres.evaluate(3, 3)


def test_triangularity_enforced():
    base = Q()
    y = Generator("y", 1, 1)
    with pytest.raises(DgalgError):
        # dy refers to y itself
        SemifreePresentation(base, [y], [{((0, 1),): base.unit_elt()}])


def test_d_squared_enforced():
    base = Q()
    gens = [Generator("t", 0, 1), Generator("y", 1, 1), Generator("z", 2, 1)]
    # dz = y with dy = t: d^2 z = t != 0
    dgens = [{}, {((0, 1),): base.unit_elt()}, {((1, 1),): base.unit_elt()}]
    with pytest.raises(DgalgError):
        SemifreePresentation(base, gens, dgens)


def test_sym_zero_is_base():
    m = q_module({}, name="0")
    a = sym(m, 4, 4)
    assert a.total_dim() == 1


def test_sym_odd_class():
    a = sym(point_module(1), 5, 5)
    h = homology(a)
    assert h.dim(0, 0) == 1 and h.dim(1, 0) == 1
    assert h.total_dim(2) == 0


def test_sym_even_class():
    a = sym(point_module(2), 5, 5)
    h = homology(a)
    for d in (0, 2, 4):
        assert h.total_dim(d) == 1
    for d in (1, 3):
        assert h.total_dim(d) == 0


def test_sym_power_split():
    ev = sym(point_module(2), 6, 6)
    total = {}
    for p in range(0, 4):
        sp = sym_power_complex(ev, p)
        for piece, n in sp.dims_table().items():
            total[piece] = total.get(piece, 0) + n
    assert all(total.get(piece, 0) == n for piece, n in ev.dims_table().items() if piece[0] <= 6)


def test_sym_with_differential():
    # M = Q[1] --id--> Q[0]: Sym(M) should be acyclic except H_0 = Q
    from dgalg.linalg import Matrix

    m = q_module({(0, 0): 1, (1, 0): 1}, {(1, 0): Matrix.identity(1)})
    with pytest.raises(InfinitePiece):
        sym(m, 4, 4)
    m2 = q_module({(0, 1): 1, (1, 1): 1}, {(1, 1): Matrix.identity(1)})
    a = sym(m2, 4, 4)
    h = homology(a)
    assert h.dim(0, 0) == 1
    assert all(h.total_dim(d) == 0 for d in range(1, h.certified_degree + 1))
    assert all(h.dim(0, w) == 0 for w in range(1, 5))


def test_base_inclusion_strict():
    from fixtures import truncated_polynomial_base
    from dgalg.semifree import Generator as G

    base = truncated_polynomial_base(2)
    pres = SemifreePresentation(
        base, [G("y", 1, 1)], [{(): base.basis_elt((0, 1), 0)}]
    )
    a = pres.evaluate(4, 4)
    incl = a.base_inclusion()
    x = base.basis_elt((0, 1), 0)
    img = incl.apply(x)
    assert sum(len(v) for v in img.values()) >= 1
    h = homology(a)
    # dy = e kills the weight-1 class: H_0 = Q only
    assert h.dim(0, 0) == 1 and h.dim(0, 1) == 0
    # but e*y is a surviving cycle: one more generator would be needed to
    # kill it (the classical infinite resolution over the dual numbers)
    assert h.dim(1, 2) == 1
    assert h.total_dim(1) == 1


def test_poly_signs_odd_generators():
    base = Q()
    pres = SemifreePresentation(
        base, [Generator("a", 1, 1), Generator("b", 1, 1)], [{}, {}]
    )
    pa = pres.generator_poly(0)
    pb = pres.generator_poly(1)
    ab = pres.poly_mul(pa, pb)
    ba = pres.poly_mul(pb, pa)
    assert pres.poly_add(ab, ba) == {}
    assert pres.poly_mul(pa, pa) == {}
