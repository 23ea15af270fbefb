r"""Test grid complex."""

import numpy as np
import pytest

from divcurl_forge.errors import DegreeError, ShapeMismatchError
from divcurl_forge.grid_complex import (
    Cochain,
    PeriodicGrid,
    adjointness_defect,
    d_matrix,
    exterior_derivative,
    harmonic_basis,
    hodge_decompose,
    hodge_star,
    l2_inner,
    laplace_beltrami,
    laplacian_matrix,
    pair_with_test,
)


def random_cochain(grid: PeriodicGrid, q: int, seed: int = 0) -> Cochain:
    r"""Random cochain.

    :param grid:
    :type grid: PeriodicGrid
    :param q:
    :type q: int
    :param seed:
    :type seed: int
    :rtype: Cochain
    """
    rng = np.random.default_rng(seed)
    return Cochain(grid, q, rng.standard_normal(grid.cell_count(q)))


class Test:
    r"""Test."""

    @staticmethod
    @pytest.mark.parametrize("dim", [2, 3])
    def test_dd(dim: int) -> None:
        r"""Test dd.

        :param dim:
        :type dim: int
        :rtype: None
        """
        grid = PeriodicGrid.uniform(dim, 8)
        for q in range(dim - 1):
            product = d_matrix(grid, q + 1) @ d_matrix(grid, q)
            product.eliminate_zeros()
            assert product.nnz == 0

    @staticmethod
    @pytest.mark.parametrize("dim", [2, 3])
    def test_adjointness(dim: int) -> None:
        r"""Test adjointness.

        :param dim:
        :type dim: int
        :rtype: None
        """
        grid = PeriodicGrid.uniform(dim, 8)
        for q in range(dim):
            alpha = random_cochain(grid, q, q)
            beta = random_cochain(grid, q + 1, q + 10)
            assert adjointness_defect(alpha, beta) <= 1e-12

    @staticmethod
    def test_star_star() -> None:
        r"""Test star star.

        :rtype: None
        """
        grid = PeriodicGrid(2, (8, 4), (1.0, 0.5))
        c = random_cochain(grid, 1)
        twice = hodge_star(hodge_star(c))
        assert not twice.dual
        np.testing.assert_allclose(twice.values, -c.values, atol=1e-12)

    @staticmethod
    def test_invalid() -> None:
        r"""Test invalid.

        :rtype: None
        """
        grid = PeriodicGrid.uniform(2, 4)
        with pytest.raises(DegreeError):
            Cochain.zeros(grid, 3)
        with pytest.raises(ShapeMismatchError):
            Cochain(grid, 1, np.zeros(5))
        with pytest.raises(DegreeError):
            d_matrix(grid, 2)
        with pytest.raises(ShapeMismatchError):
            Cochain.zeros(grid, 1) + Cochain.zeros(grid, 2)

    @staticmethod
    def test_constant_form() -> None:
        r"""Test constant form.

        :rtype: None
        """
        grid = PeriodicGrid.uniform(2, 16)
        dx = Cochain.constant_form(grid, 1, {(0,): 1.0})
        assert l2_inner(dx, dx) == pytest.approx(1.0)
        assert exterior_derivative(dx).norm() == pytest.approx(0.0, abs=1e-14)
        psi = Cochain.sample(grid, lambda *x: np.ones_like(x[0]))
        assert pair_with_test(dx, dx, psi) == pytest.approx(l2_inner(dx, dx))

    @staticmethod
    def test_constant_kernel() -> None:
        r"""Test constant kernel.

        :rtype: None
        """
        grid = PeriodicGrid.uniform(3, 4)
        laplacian = laplacian_matrix(grid, 0)
        np.testing.assert_allclose(
            laplacian @ np.ones(grid.cell_count(0)), 0.0, atol=1e-12
        )
        assert harmonic_basis(grid, 1).shape == (grid.cell_count(1), 3)

    @staticmethod
    def test_hodge_decompose() -> None:
        r"""Test hodge decompose.

        :rtype: None
        """
        grid = PeriodicGrid.uniform(2, 16)
        c = random_cochain(grid, 1, 3)
        result = hodge_decompose(c, 1e-10)
        alpha, beta, h = result
        assert alpha.degree == 0
        assert beta.degree == 2
        assert result.reassembly_residual <= 1e-12
        assert result.harmonic_defect <= 1e-6
        assert result.laplacian_residual <= 1e-8
        assert abs(l2_inner(result.exact, result.coexact)) <= 1e-10
        assert all(info.success for info in result.infos)
        assert h.norm() <= c.norm()

    @staticmethod
    def test_hodge_decompose_parallel() -> None:
        r"""Test hodge decompose parallel.

        :rtype: None
        """
        grid = PeriodicGrid.uniform(2, 8)
        dx = Cochain.constant_form(grid, 1, {(0,): 2.0, (1,): -1.0})
        result = hodge_decompose(dx)
        np.testing.assert_allclose(result.h.values, dx.values, atol=1e-10)
        assert result.exact.norm() <= 1e-10

    @staticmethod
    @pytest.mark.parametrize("q", [0, 1, 2])
    def test_laplacian_commutes(q: int) -> None:
        r"""Test laplacian commutes.

        :param q:
        :type q: int
        :rtype: None
        """
        grid = PeriodicGrid(3, (4, 6, 8), (1.0, 2.0, 0.5))
        c = random_cochain(grid, q, q)
        left = exterior_derivative(laplace_beltrami(c)).values
        right = laplace_beltrami(exterior_derivative(c)).values
        np.testing.assert_allclose(
            left, right, atol=1e-12 * np.abs(right).max()
        )

    @staticmethod
    def test_hodge_decompose_harmonic_part() -> None:
        r"""Test hodge decompose harmonic part.

        A loose solve leaves ``Δh`` visibly nonzero.

        :rtype: None
        """
        grid = PeriodicGrid.uniform(2, 16)
        c = random_cochain(grid, 1, 5)
        tight = hodge_decompose(c, 1e-10)
        loose = hodge_decompose(c, 1e-1)
        assert tight.laplacian_residual <= 1e-8
        assert loose.laplacian_residual > 100 * tight.laplacian_residual
