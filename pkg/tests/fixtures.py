"""Shared example objects used across the test suite."""

from fractions import Fraction

from dgalg.cdga import FiniteCdga, artin_base, q_algebra, q_module
from dgalg.linalg import Matrix
from dgalg.semifree import Generator, Poly, SemifreePresentation


def Q(degree_bound=48, weight_bound=48) -> FiniteCdga:
    return q_algebra(degree_bound, weight_bound)


def truncated_polynomial_base(order: int, var: str = "s", **kw) -> FiniteCdga:
    """Q[s]/(s^order) as a discrete algebra, s given weight 1."""
    n = order

    def product(i, j):
        out = [0] * n
        if i + j < n:
            out[i + j] = 1
        return out

    structure = [[product(i, j) for j in range(n)] for i in range(n)]
    labels = ["1"] + [var if k == 1 else f"{var}^{k}" for k in range(1, n)]
    return artin_base(
        structure,
        unit=[1] + [0] * (n - 1),
        weights=list(range(n)),
        aug=[1] + [0] * (n - 1),
        labels=labels,
        name=f"Q[{var}]/({var}^{order})",
        **kw,
    )


def dual_numbers(**kw) -> FiniteCdga:
    return truncated_polynomial_base(2, var="e", **kw)


def koszul_presentation(n_y: int = 1) -> SemifreePresentation:
    """Q[t]<y_1..y_k ; dy_i = t^2> with t of weight 1, y_i of weight 2."""
    base = Q()
    gens = [Generator("t", 0, 1)]
    dgens: list[Poly] = [{}]
    t_sq = (((0, 2),),)  # monomial t^2
    for i in range(n_y):
        gens.append(Generator(f"y{i + 1}" if n_y > 1 else "y", 1, 2))
        dgens.append({t_sq[0]: base.unit_elt()})
    return SemifreePresentation(base, gens, dgens, name="koszul")


def exterior_presentation() -> SemifreePresentation:
    base = Q()
    return SemifreePresentation(
        base, [Generator("y", 1, 1)], [{}], name="exterior"
    )


def residue_field_module(b: FiniteCdga):
    """Q as a module over an augmented discrete base: degree-positive and
    weight-positive elements act by zero, the unit by the identity."""
    from dgalg.cdga import DgModule

    if b.dim((0, 0)) != 1:
        raise ValueError("expected a local base with a one-dimensional unit piece")
    return DgModule(
        b,
        {(0, 0): ("1",)},
        {},
        {((0, 0), (0, 0)): Matrix.identity(1)},
        degree_bound=b.degree_bound,
        weight_bound=b.weight_bound,
        name="Q",
    )


def point_module(n: int, weight: int = 0, dims: int = 1):
    """Q^dims concentrated in degree n."""
    return q_module({(n, weight): dims}, name=f"Q[{n}]")


def two_step_module():
    """Q in degrees 0 and 1 with zero differential."""
    return q_module({(0, 0): 1, (1, 0): 1}, name="Q+Q[1]")


def random_q_module(rng, max_degree=3, max_weight=2, max_dim=2):
    """A random finite complex over Q with exact d^2 = 0.

    Built by choosing random dimensions and then a random differential whose
    square is forced to zero by composing through a random middle term is
    overkill here: we instead pick random matrices and replace d_{i+1} by a
    random matrix into ker(d_i)."""
    from dgalg.linalg import kernel_basis

    dims = {}
    for d in range(max_degree + 1):
        for w in range(max_weight + 1):
            n = rng.randint(0, max_dim)
            if n:
                dims[(d, w)] = n
    diffs = {}
    for w in range(max_weight + 1):
        prev_kernel = None  # kernel basis of d at the degree below
        for d in range(1, max_degree + 1):
            n = dims.get((d, w), 0)
            m = dims.get((d - 1, w), 0)
            if n == 0 or m == 0:
                prev_kernel = Matrix.identity(n) if n else None
                continue
            if prev_kernel is None or prev_kernel.ncols == m:
                raw = Matrix(
                    m, n, [[rng.randint(-2, 2) for _ in range(n)] for _ in range(m)]
                )
            else:
                coeff = Matrix(
                    prev_kernel.ncols,
                    n,
                    [[rng.randint(-2, 2) for _ in range(n)] for _ in range(prev_kernel.ncols)],
                )
                raw = prev_kernel.mul(coeff)
            diffs[(d, w)] = raw
            prev_kernel = kernel_basis(raw)
    # normalize: drop zero diffs
    diffs = {p: m for p, m in diffs.items() if not m.is_zero()}
    return q_module(dims, diffs, name="random")
