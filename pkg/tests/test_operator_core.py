r"""Test operator core."""

import numpy as np
import pytest
from scipy import sparse

from divcurl_forge.errors import ShapeMismatchError, SingularOperatorError
from divcurl_forge.grid_complex import PeriodicGrid
from divcurl_forge.operator_core import (
    OperatorPair,
    certify_coercivity,
    check_orthogonality,
    coercivity_constant,
    compensated_pairing_test,
    decompose_element,
    kernel_basis,
    load_pair,
    save_pair,
)


class Test:
    r"""Test."""

    @staticmethod
    @pytest.mark.parametrize("dim", [2, 3])
    def test_kernel(dim: int) -> None:
        r"""Test kernel.

        :param dim:
        :type dim: int
        :rtype: None
        """
        p = OperatorPair.from_grid(PeriodicGrid.uniform(dim, 4))
        basis = kernel_basis(p)
        assert len(basis) == dim
        assert not basis.ambiguous
        assert check_orthogonality(p) <= 1e-12

    @staticmethod
    def test_shapes() -> None:
        r"""Test shapes.

        :rtype: None
        """
        with pytest.raises(ShapeMismatchError):
            OperatorPair(sparse.identity(3), sparse.identity(4))
        with pytest.raises(SingularOperatorError):
            OperatorPair(
                sparse.identity(3),
                sparse.identity(3),
                sparse.diags([1.0, 0.0, 1.0]),
            )

    @staticmethod
    def test_coercivity() -> None:
        r"""Test coercivity.

        :rtype: None
        """
        p = OperatorPair.from_grid(PeriodicGrid.uniform(2, 4))
        constant = coercivity_constant(p)
        assert np.isfinite(constant)
        assert certify_coercivity(p, constant, 2000) <= 1 + 1e-8

    @staticmethod
    def test_decompose_element() -> None:
        r"""Test decompose element.

        :rtype: None
        """
        p = OperatorPair.from_grid(PeriodicGrid.uniform(2, 8))
        u = np.random.default_rng(1).standard_normal(p.dim_H)
        result = decompose_element(p, u, 1e-10)
        assert all(info.success for info in result.infos)
        assert result.residual <= 1e-6
        reassembled = (
            result.kernel_part
            + p.adjoint_S() @ result.a
            + p.adjoint_T() @ result.b
        )
        np.testing.assert_allclose(reassembled, u, atol=1e-12)

    @staticmethod
    def test_pairing_needs_three() -> None:
        r"""Test pairing needs three.

        :rtype: None
        """
        p = OperatorPair.from_grid(PeriodicGrid.uniform(2, 4))
        zero = np.zeros(p.dim_H)
        with pytest.raises(ShapeMismatchError):
            compensated_pairing_test(p, [zero] * 2, [zero] * 2, (zero, zero))

    @staticmethod
    def test_pairing_constant() -> None:
        r"""Test pairing constant.

        :rtype: None
        """
        p = OperatorPair.from_grid(PeriodicGrid.uniform(2, 4))
        u = np.ones(p.dim_H)
        report = compensated_pairing_test(p, [u] * 3, [u] * 3, (u, u))
        assert report.limit_pairing == pytest.approx(p.inner_H(u, u))
        assert max(row.gap for row in report.rows) == 0.0
        assert report.order is None

    @staticmethod
    def test_save_load(tmp_path) -> None:
        r"""Test save load.

        :param tmp_path:
        :rtype: None
        """
        p = OperatorPair.from_grid(PeriodicGrid.uniform(2, 4))
        save_pair(p, tmp_path)
        loaded = load_pair(tmp_path)
        np.testing.assert_allclose(loaded.S.toarray(), p.S.toarray())
        np.testing.assert_allclose(loaded.T.toarray(), p.T.toarray())
        np.testing.assert_allclose(loaded.gram_H, p.gram_H)

    @staticmethod
    def test_kernel_modes_agree() -> None:
        r"""Test kernel modes agree.

        :rtype: None
        """
        p = OperatorPair.from_grid(PeriodicGrid.uniform(2, 4))
        dense = kernel_basis(p, mode="dense")
        iterative = kernel_basis(p, mode="iterative")
        assert len(dense) == len(iterative) == 2
        np.testing.assert_allclose(
            iterative.vectors @ iterative.vectors.T,
            dense.vectors @ dense.vectors.T,
            atol=1e-8,
        )

    @staticmethod
    def test_kernel_small_singular_value() -> None:
        r"""Test kernel small singular value.

        A singular value ``1e-6`` times the largest is above the ``1e-8``
        relative threshold in both modes.

        :rtype: None
        """
        S = sparse.diags(np.logspace(0, -6, 10))
        T = sparse.csr_matrix((1, 10))
        p = OperatorPair(S, T)
        for mode in ("dense", "iterative"):
            basis = kernel_basis(p, mode=mode)
            assert len(basis) == 0
            assert not basis.ambiguous

    @staticmethod
    def test_kernel_large() -> None:
        r"""Test kernel large.

        :rtype: None
        """
        values = np.concatenate([np.zeros(20), np.arange(1.0, 21.0)])
        p = OperatorPair(sparse.diags(values), sparse.csr_matrix((1, 40)))
        dense = kernel_basis(p, mode="dense")
        iterative = kernel_basis(p, mode="iterative")
        assert len(dense) == len(iterative) == 20
        projector = np.diag((values == 0).astype(float))
        np.testing.assert_allclose(
            iterative.vectors @ iterative.vectors.T, projector, atol=1e-8
        )
