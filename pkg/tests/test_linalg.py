import random
from fractions import Fraction

import pytest

from dgalg.errors import NoSolution
from dgalg.linalg import (
    Matrix,
    column_space_basis,
    kernel_basis,
    quotient_basis,
    rank,
    rref,
    solve,
    vec,
)


def test_rank_identity():
    assert rank(Matrix.identity(2)) == 2


def test_rank_zero():
    assert rank(Matrix.zero(3, 4)) == 0


def test_rank_dependent_rows():
    assert rank(Matrix(2, 2, [[1, 2], [2, 4]])) == 1


def test_rank_fractions():
    m = Matrix(2, 3, [[Fraction(1, 2), 1, 0], [Fraction(1, 4), Fraction(1, 2), 0]])
    assert rank(m) == 1


def test_kernel_identity_empty():
    k = kernel_basis(Matrix.identity(3))
    assert k.ncols == 0


def test_kernel_zero_map():
    k = kernel_basis(Matrix.zero(1, 2))
    assert k.ncols == 2


def test_kernel_line():
    k = kernel_basis(Matrix(1, 2, [[1, 1]]))
    assert k.ncols == 1
    col = k.column(0)
    # span{(1, -1)}: normalize on the first nonzero entry
    assert col[0] != 0
    assert col[1] / col[0] == -1


def test_solve_identity():
    v = vec([3, Fraction(1, 7)])
    assert solve(Matrix.identity(2), v) == v


def test_solve_no_solution():
    with pytest.raises(NoSolution):
        solve(Matrix.zero(2, 2), vec([1, 0]))


def test_solve_division():
    assert solve(Matrix(1, 1, [[2]]), vec([1])) == (Fraction(1, 2),)


def test_quotient_trivial_sub():
    proj, sect = quotient_basis(Matrix(3, 0), 3)
    assert proj == Matrix.identity(3)
    assert sect == Matrix.identity(3)


def test_quotient_full_sub():
    proj, _ = quotient_basis(Matrix.identity(2), 2)
    assert proj.nrows == 0


def test_quotient_diag_line():
    sub = Matrix.from_columns(2, [vec([1, 1])])
    proj, sect = quotient_basis(sub, 2)
    assert proj.nrows == 1
    assert proj.mul(sect) == Matrix.identity(1)
    assert all(x == 0 for x in proj.apply(vec([1, 1])))


def _random_matrix(rng, nrows, ncols):
    return Matrix(
        nrows, ncols, [[rng.randint(-4, 4) for _ in range(ncols)] for _ in range(nrows)]
    )


def test_rank_nullity_random():
    rng = random.Random(20260824)
    for _ in range(40):
        m = _random_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
        k = kernel_basis(m)
        assert rank(m) + k.ncols == m.ncols
        if k.ncols:
            assert m.mul(k).is_zero()


def test_rank_matches_rref_random():
    rng = random.Random(4021)
    for _ in range(40):
        m = _random_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
        _, pivots = rref(m)
        assert rank(m) == len(pivots)


def test_solve_roundtrip_random():
    rng = random.Random(99)
    for _ in range(30):
        m = _random_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
        x = vec([rng.randint(-3, 3) for _ in range(m.ncols)])
        target = m.apply(x)
        sol = solve(m, target)
        assert m.apply(sol) == target


def test_quotient_projection_kernel_random():
    rng = random.Random(7)
    for _ in range(25):
        dim = rng.randint(1, 6)
        sub = _random_matrix(rng, dim, rng.randint(0, dim))
        proj, sect = quotient_basis(sub, dim)
        qdim = dim - rank(sub)
        assert proj.nrows == qdim
        if qdim:
            assert proj.mul(sect) == Matrix.identity(qdim)
        assert proj.mul(sub).is_zero()


def test_column_space_basis():
    m = Matrix(2, 3, [[1, 2, 0], [2, 4, 1]])
    b = column_space_basis(m)
    assert b.ncols == 2


def test_determinism():
    m = Matrix(3, 4, [[1, 2, 3, 4], [2, 4, 6, 8], [0, 1, 1, 0]])
    assert kernel_basis(m).rows == kernel_basis(m.copy()).rows
    assert rref(m)[0].rows == rref(m.copy())[0].rows
