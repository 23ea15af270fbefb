r"""Test immersion geometry."""

from dataclasses import replace

import numpy as np
import pytest

from divcurl_forge.errors import GeometryError, ShapeMismatchError
from divcurl_forge.immersion_geometry import (
    Chart,
    ImmersionField,
    build_v_omega,
    divcurl_identity_check,
    fundamental_data,
    gauss_curvature,
    gcr_residuals,
    isometry_defect,
    reformulated_gcr_residuals,
    riemann_curvature,
    sectional_curvature,
)
from divcurl_forge.surfaces import SURFACES, golden_surface
from divcurl_forge.utils import fit_order


class Test:
    r"""Test."""

    @staticmethod
    def test_chart() -> None:
        r"""Test chart.

        :rtype: None
        """
        with pytest.raises(ShapeMismatchError):
            Chart(2, 1, (0.0, 0.0), (1.0, 1.0), (4, 16))
        with pytest.raises(ShapeMismatchError):
            Chart(2, 1, (0.0, 1.0), (1.0, 1.0), (16, 16))
        metric = np.zeros((16, 16, 2, 2))
        with pytest.raises(GeometryError):
            Chart(2, 1, (0.0, 0.0), (1.0, 1.0), (16, 16), metric=metric)

    @staticmethod
    def test_rank_deficient() -> None:
        r"""Test rank deficient.

        :rtype: None
        """
        chart = Chart(2, 1, (0.0, 0.0), (1.0, 1.0), (16, 16))
        with pytest.raises(GeometryError):
            ImmersionField(chart, np.zeros((16, 16, 3)))

    @staticmethod
    def test_plane() -> None:
        r"""Test plane.

        :rtype: None
        """
        surface = golden_surface("plane", 16, analytic=True)
        sup, l2 = isometry_defect(surface.immersion)
        assert sup <= 1e-14
        assert l2 <= 1e-14
        residuals = gcr_residuals(
            surface.chart, fundamental_data(surface.immersion)
        )
        assert max(residuals.sup.values()) <= 1e-10

    @staticmethod
    def test_sphere_curvature() -> None:
        r"""Test sphere curvature.

        :rtype: None
        """
        surface = golden_surface("sphere", 32, analytic=True)
        chart = surface.chart
        sectional = sectional_curvature(riemann_curvature(chart))
        np.testing.assert_allclose(
            sectional[chart.interior()], 1.0, atol=1e-2
        )
        np.testing.assert_allclose(surface.gauss_curvature, 1.0)
        extrinsic = gauss_curvature(fundamental_data(surface.immersion))
        np.testing.assert_allclose(
            extrinsic[chart.interior()], 1.0, atol=1e-2
        )

    @staticmethod
    def test_cylinder_codazzi() -> None:
        r"""Test cylinder codazzi.

        :rtype: None
        """
        surface = golden_surface("cylinder", 32, analytic=True)
        residuals = gcr_residuals(
            surface.chart, fundamental_data(surface.immersion)
        )
        assert residuals.sup["gauss"] <= 1e-8
        assert residuals.sup["codazzi"] <= 1e-3
        assert residuals.sup["ricci"] == 0.0

    @staticmethod
    @pytest.mark.parametrize("name", sorted(SURFACES))
    def test_surfaces(name: str) -> None:
        r"""Test surfaces.

        :param name:
        :type name: str
        :rtype: None
        """
        surface = golden_surface(name, 16)
        assert surface.name == name
        assert surface.chart.resolution == (16, 16)
        assert surface.gauss_curvature.shape == (16, 16)
        if surface.immersion is not None:
            assert surface.immersion.f.shape[-1] == surface.chart.ambient_dim

    @staticmethod
    def test_unknown_surface() -> None:
        r"""Test unknown surface.

        :rtype: None
        """
        with pytest.raises(KeyError):
            golden_surface("klein_bottle")

    @staticmethod
    @pytest.mark.parametrize("name", ["sphere", "torus", "helicoid"])
    def test_reformulation(name: str) -> None:
        r"""Test reformulation.

        :param name:
        :type name: str
        :rtype: None
        """
        surface = golden_surface(name, 32, analytic=True)
        chart = surface.chart
        curvature = riemann_curvature(chart)
        fd = fundamental_data(surface.immersion)
        direct = gcr_residuals(chart, fd, curvature)
        vo = build_v_omega(fd)
        reformulated = reformulated_gcr_residuals(vo, fd, curvature)
        for equation, sign in (("gauss", 1), ("codazzi", -1), ("ricci", 1)):
            np.testing.assert_allclose(
                reformulated.fields[equation],
                sign * direct.fields[equation],
                atol=1e-9,
            )
            assert reformulated.sup[equation] == pytest.approx(
                direct.sup[equation], rel=1e-6, abs=1e-12
            )

    @staticmethod
    def test_reformulation_reads_normal_fields() -> None:
        r"""Test reformulation reads normal fields.

        :rtype: None
        """
        rng = np.random.default_rng(0)
        for name, equation in (("sphere", "codazzi"), ("torus", "ricci")):
            surface = golden_surface(name, 32, analytic=True)
            curvature = riemann_curvature(surface.chart)
            fd = fundamental_data(surface.immersion)
            vo = build_v_omega(fd)
            noisy = replace(vo, VN=rng.standard_normal(vo.VN.shape))
            clean = reformulated_gcr_residuals(vo, fd, curvature)
            corrupted = reformulated_gcr_residuals(noisy, fd, curvature)
            assert corrupted.sup[equation] > 1e-2
            assert corrupted.sup[equation] > 100 * clean.sup[equation]

    @staticmethod
    def test_identity_order() -> None:
        r"""Test identity order.

        :rtype: None
        """
        residuals = []
        steps = []
        for n in (32, 64):
            surface = golden_surface("sphere", n, analytic=True)
            fd = fundamental_data(surface.immersion)
            check = divcurl_identity_check(build_v_omega(fd), fd)
            assert check.n_residual <= 1e-12
            assert check.expansion_agreement <= 1e-1
            residuals.append(check.b_residual)
            steps.append(max(surface.chart.spacing))
        order = fit_order(steps, residuals)
        assert order is not None
        assert order >= 0.9
