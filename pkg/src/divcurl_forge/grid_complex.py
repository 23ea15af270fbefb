r"""Grid complex
================

Integrated discrete exterior calculus on flat periodic grids of dimension 2
or 3. A degree ``q`` cochain stores one integral per oriented ``q``-cell;
cells are grouped in blocks by their axis set (``itertools.combinations``
order) and indexed inside a block by the C-ordered multi-index of their
lowest corner.

Primal cochains live on the grid itself. The Hodge star sends them to dual
cochains, indexed by the complementary axis set of the primal cell they
are dual to. The dual coboundary is the signed transpose of the primal one
with dual orientations induced so that
``δ = (-1)^{n(q-1)+1} ★ d ★`` is the inner-product adjoint of ``d``.
"""

import logging
from dataclasses import dataclass, field
from functools import cache, reduce
from itertools import combinations
from math import comb, prod

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from . import IDENTITY_TOL, SOLVER_TOL
from .errors import DegreeError, ShapeMismatchError
from .solvers import SolverInfo, conjugate_gradient, project_out

logger = logging.getLogger(__name__)

AxisSet = tuple[int, ...]


@dataclass(frozen=True)
class PeriodicGrid:
    r"""Flat n-torus cut into ``resolution`` cells per axis."""

    dim: int
    resolution: tuple[int, ...]
    period: tuple[float, ...]

    def __post_init__(self) -> None:
        r"""Check invariants.

        :rtype: None
        """
        if self.dim not in {2, 3}:
            raise ShapeMismatchError(f"dim must be 2 or 3, got {self.dim}")
        if len(self.resolution) != self.dim or len(self.period) != self.dim:
            raise ShapeMismatchError(
                "resolution and period need one entry per axis"
            )
        if min(self.resolution) < 4:
            raise ShapeMismatchError(
                f"every axis needs at least 4 cells: {self.resolution}"
            )
        if min(self.period) <= 0:
            raise ShapeMismatchError(
                f"periods must be positive: {self.period}"
            )
        object.__setattr__(
            self, "resolution", tuple(int(n) for n in self.resolution)
        )
        object.__setattr__(
            self, "period", tuple(float(p) for p in self.period)
        )

    @classmethod
    def uniform(cls, dim: int, n: int, length: float = 1.0) -> "PeriodicGrid":
        r"""Uniform.

        :param dim:
        :type dim: int
        :param n:
        :type n: int
        :param length:
        :type length: float
        :rtype: "PeriodicGrid"
        """
        return cls(dim, (n,) * dim, (length,) * dim)

    @property
    def spacing(self) -> tuple[float, ...]:
        r"""Spacing.

        :rtype: tuple[float, ...]
        """
        return tuple(
            p / n for p, n in zip(self.period, self.resolution, strict=True)
        )

    @property
    def block_size(self) -> int:
        r"""Block size.

        :rtype: int
        """
        return prod(self.resolution)

    @property
    def volume(self) -> float:
        r"""Volume.

        :rtype: float
        """
        return prod(self.period)

    def axis_sets(self, q: int) -> list[AxisSet]:
        r"""Axis sets of the ``q``-cells in storage order.

        :param q:
        :type q: int
        :rtype: list[AxisSet]
        """
        return list(combinations(range(self.dim), q))

    def cell_count(self, q: int) -> int:
        r"""Cell count.

        :param q:
        :type q: int
        :rtype: int
        """
        return comb(self.dim, q) * self.block_size

    def cell_volume(self, axis_set: AxisSet) -> float:
        r"""Cell volume.

        :param axis_set:
        :type axis_set: AxisSet
        :rtype: float
        """
        h = self.spacing
        return prod(h[a] for a in axis_set)

    def complement(self, axis_set: AxisSet) -> AxisSet:
        r"""Complement.

        :param axis_set:
        :type axis_set: AxisSet
        :rtype: AxisSet
        """
        return tuple(a for a in range(self.dim) if a not in axis_set)

    def coordinates(
        self, offset: AxisSet = ()
    ) -> tuple[NDArray[np.float64], ...]:
        r"""Node coordinates, shifted by half a cell along ``offset``.

        :param offset:
        :type offset: AxisSet
        :rtype: tuple[NDArray[np.float64], ...]
        """
        axes = [
            (np.arange(n) + (0.5 if a in offset else 0.0)) * h
            for a, (n, h) in enumerate(
                zip(self.resolution, self.spacing, strict=True)
            )
        ]
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True, eq=False)
class Cochain:
    r"""Values on the oriented cells of one degree."""

    grid: PeriodicGrid
    degree: int
    values: NDArray[np.float64] = field(repr=False)
    dual: bool = False

    def __post_init__(self) -> None:
        r"""Check invariants and freeze the values.

        :rtype: None
        """
        if not 0 <= self.degree <= self.grid.dim:
            raise DegreeError(
                f"degree {self.degree} outside 0..{self.grid.dim}"
            )
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size != self.grid.cell_count(self.degree):
            raise ShapeMismatchError(
                f"{values.size} values for "
                f"{self.grid.cell_count(self.degree)} cells"
            )
        if not np.all(np.isfinite(values)):
            raise ShapeMismatchError("cochain values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(
        cls, grid: PeriodicGrid, degree: int, dual: bool = False
    ) -> "Cochain":
        r"""Zeros.

        :param grid:
        :type grid: PeriodicGrid
        :param degree:
        :type degree: int
        :param dual:
        :type dual: bool
        :rtype: "Cochain"
        """
        if not 0 <= degree <= grid.dim:
            raise DegreeError(f"degree {degree} outside 0..{grid.dim}")
        return cls(grid, degree, np.zeros(grid.cell_count(degree)), dual)

    @classmethod
    def from_blocks(
        cls,
        grid: PeriodicGrid,
        degree: int,
        blocks: dict[AxisSet, NDArray[np.float64]],
    ) -> "Cochain":
        r"""Assemble a primal cochain from per-axis-set arrays.

        Missing axis sets are zero.

        :param grid:
        :type grid: PeriodicGrid
        :param degree:
        :type degree: int
        :param blocks:
        :type blocks: dict[AxisSet, NDArray[np.float64]]
        :rtype: "Cochain"
        """
        parts = []
        for axis_set in grid.axis_sets(degree):
            block = blocks.get(axis_set)
            if block is None:
                parts.append(np.zeros(grid.block_size))
            else:
                parts.append(
                    np.broadcast_to(block, grid.resolution).ravel()
                )
        return cls(grid, degree, np.concatenate(parts))

    @classmethod
    def sample(cls, grid: PeriodicGrid, func) -> "Cochain":
        r"""Sample a function at the nodes as a 0-cochain.

        :param grid:
        :type grid: PeriodicGrid
        :param func: called with one coordinate array per axis
        :rtype: "Cochain"
        """
        values = np.broadcast_to(
            func(*grid.coordinates()), grid.resolution
        )
        return cls(grid, 0, values)

    @classmethod
    def constant_form(
        cls,
        grid: PeriodicGrid,
        degree: int,
        coefficients: dict[AxisSet, float],
    ) -> "Cochain":
        r"""Exact cell integrals of a parallel form ``Σ c_A dx_A``.

        :param grid:
        :type grid: PeriodicGrid
        :param degree:
        :type degree: int
        :param coefficients:
        :type coefficients: dict[AxisSet, float]
        :rtype: "Cochain"
        """
        return cls.from_blocks(
            grid,
            degree,
            {
                axis_set: np.full(
                    grid.resolution, value * grid.cell_volume(axis_set)
                )
                for axis_set, value in coefficients.items()
            },
        )

    @property
    def axis_sets(self) -> list[AxisSet]:
        r"""Axis sets.

        :rtype: list[AxisSet]
        """
        return self.grid.axis_sets(self.degree)

    def block(self, axis_set: AxisSet) -> NDArray[np.float64]:
        r"""Values of one axis set, shaped like the grid.

        :param axis_set:
        :type axis_set: AxisSet
        :rtype: NDArray[np.float64]
        """
        index = self.axis_sets.index(tuple(axis_set))
        size = self.grid.block_size
        return self.values[index * size : (index + 1) * size].reshape(
            self.grid.resolution
        )

    def like(self, values: NDArray[np.float64]) -> "Cochain":
        r"""A cochain of the same kind with new values.

        :param values:
        :type values: NDArray[np.float64]
        :rtype: "Cochain"
        """
        return Cochain(self.grid, self.degree, values, self.dual)

    def _check(self, other: "Cochain") -> None:
        if (
            other.grid != self.grid
            or other.degree != self.degree
            or other.dual != self.dual
        ):
            raise ShapeMismatchError(
                "cochains differ in grid, degree or duality"
            )

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return self.like(self.values + other.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check(other)
        return self.like(self.values - other.values)

    def __neg__(self) -> "Cochain":
        return self.like(-self.values)

    def __mul__(self, scalar: float) -> "Cochain":
        return self.like(scalar * self.values)

    __rmul__ = __mul__

    def norm(self) -> float:
        r"""L2 norm.

        :rtype: float
        """
        return float(np.sqrt(l2_inner(self, self)))


def _periodic_difference(n: int) -> sparse.csr_matrix:
    return sparse.diags(
        [-np.ones(n), np.ones(n - 1), np.ones(1)],
        [0, 1, -(n - 1)],
        shape=(n, n),
        format="csr",
    )


def _kron(mats: list[sparse.spmatrix]) -> sparse.csr_matrix:
    return reduce(lambda a, b: sparse.kron(a, b, format="csr"), mats)


def _parity(sequence: tuple[int, ...]) -> int:
    inversions = sum(
        1
        for i in range(len(sequence))
        for j in range(i + 1, len(sequence))
        if sequence[i] > sequence[j]
    )
    return -1 if inversions % 2 else 1


@cache
def d_matrix(grid: PeriodicGrid, q: int) -> sparse.csr_matrix:
    r"""Coboundary from primal ``q``- to ``(q+1)``-cochains.

    Entries are ``0, ±1``, so ``d_matrix(q+1) @ d_matrix(q)`` is exactly
    zero.

    :param grid:
    :type grid: PeriodicGrid
    :param q:
    :type q: int
    :rtype: sparse.csr_matrix
    """
    if not 0 <= q < grid.dim:
        raise DegreeError(
            f"exterior derivative of a degree {q} cochain on a "
            f"{grid.dim}-torus"
        )
    identities = [sparse.identity(n, format="csr") for n in grid.resolution]
    differences = [_periodic_difference(n) for n in grid.resolution]
    rows = []
    for target in grid.axis_sets(q + 1):
        row = []
        for source in grid.axis_sets(q):
            if not set(source) < set(target):
                row.append(None)
                continue
            (axis,) = set(target) - set(source)
            sign = -1 if target.index(axis) % 2 else 1
            mats = [
                differences[a] if a == axis else identities[a]
                for a in range(grid.dim)
            ]
            row.append(sign * _kron(mats))
        rows.append(row)
    return sparse.bmat(rows, format="csr")


@cache
def mass_vector(
    grid: PeriodicGrid, q: int, dual: bool = False
) -> NDArray[np.float64]:
    r"""Diagonal of the ``l2_inner`` Gram matrix.

    A primal cell with axis set ``A`` weighs
    ``vol(dual cell) / vol(primal cell)``; dual cochains weigh the inverse.

    :param grid:
    :type grid: PeriodicGrid
    :param q: degree of the cochain (dual degree when ``dual``)
    :type q: int
    :param dual:
    :type dual: bool
    :rtype: NDArray[np.float64]
    """
    weights = []
    for axis_set in grid.axis_sets(q):
        ratio = grid.cell_volume(grid.complement(axis_set)) / (
            grid.cell_volume(axis_set)
        )
        weights.append(np.full(grid.block_size, 1 / ratio if dual else ratio))
    result = np.concatenate(weights)
    result.flags.writeable = False
    return result


@cache
def _dual_permutation(grid: PeriodicGrid, q: int) -> sparse.csr_matrix:
    r"""Signed permutation from primal ``q`` to dual ``dim-q`` ordering."""
    source = grid.axis_sets(q)
    target = grid.axis_sets(grid.dim - q)
    size = grid.block_size
    rows = []
    cols = []
    data = []
    for i, axis_set in enumerate(source):
        j = target.index(grid.complement(axis_set))
        sign = _parity(axis_set + grid.complement(axis_set))
        rows.append(np.arange(size) + j * size)
        cols.append(np.arange(size) + i * size)
        data.append(np.full(size, float(sign)))
    count = grid.cell_count(q)
    return sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(count, count),
    )


@cache
def star_matrix(
    grid: PeriodicGrid, q: int, dual: bool = False
) -> sparse.csr_matrix:
    r"""Hodge star acting on a ``q``-cochain.

    :param grid:
    :type grid: PeriodicGrid
    :param q: degree of the input
    :type q: int
    :param dual: whether the input is a dual cochain
    :type dual: bool
    :rtype: sparse.csr_matrix
    """
    if not dual:
        return (
            _dual_permutation(grid, q) @ sparse.diags(mass_vector(grid, q))
        ).tocsr()
    p = grid.dim - q
    sign = (-1) ** (p * q)
    return (
        sign
        * sparse.diags(1 / mass_vector(grid, p))
        @ _dual_permutation(grid, p).T
    ).tocsr()


@cache
def dual_d_matrix(grid: PeriodicGrid, k: int) -> sparse.csr_matrix:
    r"""Coboundary of dual ``k``-cochains.

    :param grid:
    :type grid: PeriodicGrid
    :param k:
    :type k: int
    :rtype: sparse.csr_matrix
    """
    if not 0 <= k < grid.dim:
        raise DegreeError(
            f"exterior derivative of a dual degree {k} cochain on a "
            f"{grid.dim}-torus"
        )
    q = grid.dim - k
    sign = (-1) ** q
    return (
        sign
        * _dual_permutation(grid, q - 1)
        @ d_matrix(grid, q - 1).T
        @ _dual_permutation(grid, q).T
    ).tocsr()


@cache
def codifferential_matrix(grid: PeriodicGrid, q: int) -> sparse.csr_matrix:
    r"""``δ = (-1)^{n(q-1)+1} ★ d ★`` on primal ``q``-cochains.

    :param grid:
    :type grid: PeriodicGrid
    :param q:
    :type q: int
    :rtype: sparse.csr_matrix
    """
    if not 1 <= q <= grid.dim:
        raise DegreeError(f"codifferential of a degree {q} cochain")
    n = grid.dim
    sign = (-1) ** (n * (q - 1) + 1)
    return (
        sign
        * star_matrix(grid, n - q + 1, dual=True)
        @ dual_d_matrix(grid, n - q)
        @ star_matrix(grid, q)
    ).tocsr()


@cache
def laplacian_matrix(grid: PeriodicGrid, q: int) -> sparse.csr_matrix:
    r"""``Δ = dδ + δd``; a term whose degree is out of range is zero.

    :param grid:
    :type grid: PeriodicGrid
    :param q:
    :type q: int
    :rtype: sparse.csr_matrix
    """
    count = grid.cell_count(q)
    result = sparse.csr_matrix((count, count))
    if q >= 1:
        result = result + (
            d_matrix(grid, q - 1) @ codifferential_matrix(grid, q)
        )
    if q < grid.dim:
        result = result + (
            codifferential_matrix(grid, q + 1) @ d_matrix(grid, q)
        )
    return result.tocsr()


@cache
def harmonic_basis(grid: PeriodicGrid, q: int) -> NDArray[np.float64]:
    r"""Parallel ``q``-forms, orthonormal for ``l2_inner``, as columns.

    :param grid:
    :type grid: PeriodicGrid
    :param q:
    :type q: int
    :rtype: NDArray[np.float64]
    """
    axis_sets = grid.axis_sets(q)
    size = grid.block_size
    basis = np.zeros((grid.cell_count(q), len(axis_sets)))
    weights = mass_vector(grid, q)
    for i in range(len(axis_sets)):
        basis[i * size : (i + 1) * size, i] = 1.0
        basis[:, i] /= np.sqrt(weights @ basis[:, i] ** 2)
    basis.flags.writeable = False
    return basis


def _primal(c: Cochain, name: str) -> None:
    if c.dual:
        raise ShapeMismatchError(f"{name} acts on primal cochains")


def exterior_derivative(c: Cochain) -> Cochain:
    r"""Exterior derivative.

    :param c:
    :type c: Cochain
    :rtype: Cochain
    """
    if c.dual:
        values = dual_d_matrix(c.grid, c.degree) @ c.values
    else:
        values = d_matrix(c.grid, c.degree) @ c.values
    return Cochain(c.grid, c.degree + 1, values, c.dual)


def hodge_star(c: Cochain) -> Cochain:
    r"""Hodge star, primal to dual and back.

    :param c:
    :type c: Cochain
    :rtype: Cochain
    """
    values = star_matrix(c.grid, c.degree, c.dual) @ c.values
    return Cochain(c.grid, c.grid.dim - c.degree, values, not c.dual)


def codifferential(c: Cochain) -> Cochain:
    r"""Codifferential, the ``l2_inner`` adjoint of the exterior derivative.

    :param c:
    :type c: Cochain
    :rtype: Cochain
    """
    _primal(c, "codifferential")
    values = codifferential_matrix(c.grid, c.degree) @ c.values
    return Cochain(c.grid, c.degree - 1, values)


def laplace_beltrami(c: Cochain) -> Cochain:
    r"""Hodge Laplacian.

    :param c:
    :type c: Cochain
    :rtype: Cochain
    """
    _primal(c, "laplace_beltrami")
    return c.like(laplacian_matrix(c.grid, c.degree) @ c.values)


def l2_inner(a: Cochain, b: Cochain) -> float:
    r"""``Σ a ∧ ★b`` over the torus.

    :param a:
    :type a: Cochain
    :param b:
    :type b: Cochain
    :rtype: float
    """
    a._check(b)
    weights = mass_vector(a.grid, a.degree, a.dual)
    return float(np.dot(a.values * weights, b.values))


def _cell_coefficients(c: Cochain) -> list[NDArray[np.float64]]:
    return [
        c.block(axis_set) / c.grid.cell_volume(axis_set)
        for axis_set in c.axis_sets
    ]


def _cell_average(
    field: NDArray[np.float64], axis_set: AxisSet, shift: int
) -> NDArray[np.float64]:
    r"""Average over the ``2^q`` neighbors along ``axis_set``."""
    result = field
    for axis in axis_set:
        result = 0.5 * (result + np.roll(result, shift, axis=axis))
    return result


def pair_with_test(a: Cochain, b: Cochain, psi: Cochain) -> float:
    r"""``∫ ⟨a, b⟩ ψ dV`` with the form product evaluated per cell.

    ``ψ`` is averaged from the nodes to the centers of the cells of each
    axis set; with ``ψ ≡ 1`` the result equals :func:`l2_inner`.

    :param a:
    :type a: Cochain
    :param b:
    :type b: Cochain
    :param psi: 0-cochain
    :type psi: Cochain
    :rtype: float
    """
    a._check(b)
    _primal(a, "pair_with_test")
    if psi.degree != 0 or psi.dual or psi.grid != a.grid:
        raise ShapeMismatchError("test function must be a 0-cochain")
    weight = prod(a.grid.spacing)
    node_psi = psi.block(())
    total = 0.0
    for axis_set, ca, cb in zip(
        a.axis_sets, _cell_coefficients(a), _cell_coefficients(b), strict=True
    ):
        centred = _cell_average(node_psi, axis_set, -1)
        total += float(np.sum(ca * cb * centred))
    return total * weight


def node_product(a: Cochain, b: Cochain) -> NDArray[np.float64]:
    r"""Pointwise ``⟨a, b⟩`` reconstructed at the nodes.

    :param a:
    :type a: Cochain
    :param b:
    :type b: Cochain
    :rtype: NDArray[np.float64]
    """
    a._check(b)
    _primal(a, "node_product")
    result = np.zeros(a.grid.resolution)
    for axis_set, ca, cb in zip(
        a.axis_sets, _cell_coefficients(a), _cell_coefficients(b), strict=True
    ):
        result += _cell_average(ca, axis_set, 1) * _cell_average(
            cb, axis_set, 1
        )
    return result


@dataclass(frozen=True)
class HodgeDecomposition:
    r"""``c = d(alpha) + δ(beta) + h``.

    ``alpha`` is None for 0-cochains and ``beta`` for top-degree ones.
    """

    alpha: Cochain | None
    beta: Cochain | None
    h: Cochain
    exact: Cochain
    coexact: Cochain
    harmonic_defect: float
    laplacian_residual: float
    reassembly_residual: float
    infos: tuple[SolverInfo, ...]

    def __iter__(self):
        return iter((self.alpha, self.beta, self.h))


def hodge_decompose(
    c: Cochain, tol: float = SOLVER_TOL, maxiter: int | None = None
) -> HodgeDecomposition:
    r"""Split a cochain into exact, co-exact and harmonic parts.

    ``alpha`` solves ``Δ alpha = δc`` and ``beta`` solves ``Δ beta = dc`` by
    conjugate gradients deflated against the parallel forms, which span the
    kernels on a torus.

    :param c:
    :type c: Cochain
    :param tol:
    :type tol: float
    :param maxiter:
    :type maxiter: int | None
    :rtype: HodgeDecomposition
    """
    _primal(c, "hodge_decompose")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    grid, q = c.grid, c.degree
    infos = []
    alpha = beta = None
    exact = Cochain.zeros(grid, q)
    coexact = Cochain.zeros(grid, q)
    if q >= 1:
        laplacian = laplacian_matrix(grid, q - 1)
        rhs = codifferential(c).values
        values, info = conjugate_gradient(
            laplacian.dot,
            rhs,
            mass_vector(grid, q - 1),
            harmonic_basis(grid, q - 1),
            tol=tol,
            maxiter=maxiter,
        )
        infos.append(info)
        alpha = Cochain(grid, q - 1, values)
        exact = exterior_derivative(alpha)
    if q < grid.dim:
        laplacian = laplacian_matrix(grid, q + 1)
        rhs = exterior_derivative(c).values
        values, info = conjugate_gradient(
            laplacian.dot,
            rhs,
            mass_vector(grid, q + 1),
            harmonic_basis(grid, q + 1),
            tol=tol,
            maxiter=maxiter,
        )
        infos.append(info)
        beta = Cochain(grid, q + 1, values)
        coexact = codifferential(beta)
    h = c - exact - coexact
    scale = c.norm() or 1.0
    off_kernel = project_out(
        h.values, harmonic_basis(grid, q), mass_vector(grid, q)
    )
    harmonic_defect = h.like(off_kernel).norm() / scale
    # ‖Δh‖ against ‖c‖ times the largest row sum of Δ
    laplacian = laplacian_matrix(grid, q)
    bound = float(abs(laplacian).sum(axis=1).max())
    laplacian_residual = (
        h.like(laplacian @ h.values).norm() / (scale * bound) if bound else 0.0
    )
    reassembly = (c - (exact + coexact + h)).norm() / scale
    logger.debug(
        "hodge_decompose: degree=%d harmonic_defect=%.3e laplacian=%.3e",
        q,
        harmonic_defect,
        laplacian_residual,
    )
    return HodgeDecomposition(
        alpha,
        beta,
        h,
        exact,
        coexact,
        harmonic_defect,
        laplacian_residual,
        reassembly,
        tuple(infos),
    )


def adjointness_defect(alpha: Cochain, beta: Cochain) -> float:
    r"""Relative ``|⟨dα, β⟩ - ⟨α, δβ⟩|``.

    :param alpha:
    :type alpha: Cochain
    :param beta:
    :type beta: Cochain
    :rtype: float
    """
    left = l2_inner(exterior_derivative(alpha), beta)
    right = l2_inner(alpha, codifferential(beta))
    scale = max(alpha.norm() * beta.norm(), IDENTITY_TOL)
    return abs(left - right) / scale
