r"""Test rigidity experiments."""

from dataclasses import replace

import numpy as np
import pytest

from divcurl_forge.errors import GeometryError, ResolutionError
from divcurl_forge.experiments import epsilons
from divcurl_forge.immersion_geometry import isometry_defect, sampling_defect
from divcurl_forge.rigidity_experiments import (
    RIGIDITY_TESTS,
    bending_family,
    rigidity_report,
    strip_chart,
)


class Test:
    r"""Test."""

    @staticmethod
    def test_immersivity() -> None:
        r"""Test immersivity.

        :rtype: None
        """
        chart = strip_chart(1.0, 0.25, (256, 16))
        with pytest.raises(GeometryError):
            bending_family("corrugated_strip", epsilons([0, 1]), chart, 4.0)

    @staticmethod
    def test_unresolved() -> None:
        r"""Test unresolved.

        :rtype: None
        """
        chart = strip_chart(1.0, 0.25, (64, 16))
        with pytest.raises(ResolutionError):
            bending_family("corrugated_strip", epsilons([3, 5]), chart)

    @staticmethod
    def test_members_isometric() -> None:
        r"""Test members isometric.

        :rtype: None
        """
        chart = strip_chart(1.0, 0.25, (256, 16))
        family = bending_family("corrugated_strip", epsilons([1, 2]), chart)
        for k in range(len(family)):
            assert isometry_defect(family.member(k))[0] <= 1e-12

    @staticmethod
    def test_scaled_flat() -> None:
        r"""Test scaled flat.

        :rtype: None
        """
        chart = strip_chart(1.0, 0.25, (64, 16))
        family = bending_family(
            "scaled_flat", epsilons([1, 2, 3]), chart, stretch=1.1
        )
        report = rigidity_report(family, [RIGIDITY_TESTS["one"]])
        checks = report.checks
        assert checks["a_isometry"].value == pytest.approx(0.21)
        assert not checks["a_isometry"].passed
        assert checks["b_gcr"].passed
        assert checks["c_structural"].passed
        assert not report.verdict

    @staticmethod
    def test_constant() -> None:
        r"""Test constant.

        :rtype: None
        """
        chart = strip_chart(1.0, 0.25, (64, 16))
        family = bending_family("constant", epsilons([1, 2, 3]), chart)
        report = rigidity_report(family, [RIGIDITY_TESTS["one"]])
        assert report.verdict
        assert report.uniformly_bounded
        assert len(report.table()) == 3

    @staticmethod
    def test_corrugation() -> None:
        r"""Test corrugation.

        :rtype: None
        """
        chart = strip_chart(1.0, 0.25, (512, 16))
        family = bending_family("corrugated_strip", epsilons([1, 2, 3]), chart)
        report = rigidity_report(family, [RIGIDITY_TESTS["one_plus_x"]])
        order = report.limit.orders["one_plus_x"]
        assert report.verdict
        assert report.uniformly_bounded
        assert order is not None
        assert order >= 0.9
        for row in report.rows:
            assert row.isometry <= 1e-12
            assert row.sampling <= row.sampling_bound

    @staticmethod
    def test_sampling_defect() -> None:
        r"""Test sampling defect.

        :rtype: None
        """
        chart = strip_chart(1.0, 0.25, (256, 16))
        family = bending_family("corrugated_strip", epsilons([1, 2]), chart)
        member = family.member(1)
        x, _ = chart.coordinates()
        f = member.f.copy()
        f[..., 2] += 1e-3 * np.sin(2 * np.pi * x)
        shifted = replace(member, f=f)
        assert sampling_defect(member) <= 1e-3
        assert sampling_defect(shifted) >= 10 * sampling_defect(member)
