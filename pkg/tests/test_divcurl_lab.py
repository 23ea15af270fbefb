r"""Test divcurl lab."""

import numpy as np
import pytest

from divcurl_forge.divcurl_lab import (
    PROFILES,
    SLOW_PROFILES,
    TEST_FUNCTIONS,
    OscillatoryFamily,
    Profile,
    compactness_diagnostic,
    divcurl_experiment,
    equiintegrability_diagnostic,
    gen_oscillatory_form,
    hinv_proxy,
    resolution_schedule,
    tail_masses,
    weak_limit,
)
from divcurl_forge.errors import ResolutionError, ShapeMismatchError
from divcurl_forge.experiments import epsilons
from divcurl_forge.grid_complex import Cochain, PeriodicGrid


def family(
    resolutions: tuple, schedule: list[float], profile: str, direction: int
) -> OscillatoryFamily:
    r"""Family.

    :param resolutions:
    :type resolutions: tuple
    :param schedule:
    :type schedule: list[float]
    :param profile:
    :type profile: str
    :param direction:
    :type direction: int
    :rtype: OscillatoryFamily
    """
    return OscillatoryFamily(
        2,
        resolutions,
        (1.0, 1.0),
        SLOW_PROFILES["one"],
        PROFILES[profile],
        direction,
        tuple(schedule),
        1,
        (0,),
    )


class Test:
    r"""Test."""

    @staticmethod
    def test_profiles() -> None:
        r"""Test profiles.

        :rtype: None
        """
        assert PROFILES["sin"].variance == pytest.approx(0.5)
        assert PROFILES["shifted_cos"].variance == pytest.approx(0.125)
        profile = Profile.from_function("sin", np.sin)
        assert profile.mean == pytest.approx(0.0, abs=1e-12)
        assert profile.second_moment == pytest.approx(0.5)
        assert PROFILES["square_wave"].mean == pytest.approx(0.0, abs=1e-12)

    @staticmethod
    def test_resolution_schedule() -> None:
        r"""Test resolution schedule.

        :rtype: None
        """
        schedule = resolution_schedule(2, 16, epsilons([1, 3]))
        assert schedule == ((16, 16), (64, 16))
        schedule = resolution_schedule(2, 16, epsilons([1, 3]), 1, 1.0, 16)
        assert schedule == ((16, 32), (16, 128))

    @staticmethod
    def test_unresolved() -> None:
        r"""Test unresolved.

        :rtype: None
        """
        with pytest.raises(ResolutionError):
            family(((16, 16),), epsilons([3]), "sin", 0)
        with pytest.raises(ResolutionError):
            family(((64, 64), (64, 64)), epsilons([2, 1]), "sin", 0)

    @staticmethod
    def test_oscillatory_form() -> None:
        r"""Test oscillatory form.

        :rtype: None
        """
        fam = OscillatoryFamily.uniform(2, 8, epsilons([1, 2, 3]), "sin")
        c = gen_oscillatory_form(fam, -1)
        assert c.grid.resolution == (64, 8)
        assert abs(c.values.sum()) <= 1e-10
        np.testing.assert_allclose(c.block((1,)), 0.0)
        np.testing.assert_allclose(weak_limit(fam).values, 0.0)
        with pytest.raises(IndexError):
            gen_oscillatory_form(fam, 3)

    @staticmethod
    def test_weak_limit() -> None:
        r"""Test weak limit.

        :rtype: None
        """
        fam = OscillatoryFamily.uniform(
            2, 8, epsilons([1, 2, 3]), "shifted_sin"
        )
        limit = weak_limit(fam, 0)
        h = limit.grid.spacing[0]
        np.testing.assert_allclose(limit.block((0,)), h, rtol=1e-12)
        np.testing.assert_allclose(limit.block((1,)), 0.0)

    @staticmethod
    def test_gap_persists() -> None:
        r"""Test gap persists.

        :rtype: None
        """
        fam = OscillatoryFamily.uniform(
            2, 8, epsilons([1, 2, 3]), "sin", min_cells_per_period=32
        )
        report = divcurl_experiment(fam, fam, [TEST_FUNCTIONS["one"]])
        assert report.limits["one"] == pytest.approx(0.0, abs=1e-12)
        for gap in report.gaps("one"):
            assert gap == pytest.approx(0.5, rel=0.01)
        assert all(proxy is not None for proxy in report.proxies("dproxy"))

    @staticmethod
    def test_closed_coclosed() -> None:
        r"""Test closed coclosed.

        :rtype: None
        """
        schedule = epsilons([1, 2, 3])
        resolutions = ((16, 16), (32, 32), (64, 64))
        omega = family(resolutions, schedule, "shifted_sin", 0)
        tau = family(resolutions, schedule, "shifted_cos", 1)
        report = divcurl_experiment(omega, tau, [TEST_FUNCTIONS["one"]])
        assert report.limits["one"] == pytest.approx(1.0)
        assert max(report.gaps("one")) <= 1e-10

    @staticmethod
    def test_incompatible() -> None:
        r"""Test incompatible.

        :rtype: None
        """
        schedule = epsilons([1, 2, 3])
        omega = family(((16, 16), (32, 32), (64, 64)), schedule, "sin", 0)
        tau = family(((16, 16), (32, 32), (64, 128)), schedule, "sin", 0)
        with pytest.raises(ShapeMismatchError):
            divcurl_experiment(omega, tau, [TEST_FUNCTIONS["one"]])

    @staticmethod
    def test_tail_masses() -> None:
        r"""Test tail masses.

        :rtype: None
        """
        magnitude = np.array([1.0, 2.0, 3.0, 4.0])
        tails = tail_masses(magnitude, 0.5, [0.0, 2.0, 4.0])
        assert tails == [(0.0, 5.0), (2.0, 3.5), (4.0, 0.0)]

    @staticmethod
    def test_hinv_proxy() -> None:
        r"""Test hinv proxy.

        A parallel form lies in the kernel of ``Δ``.

        :rtype: None
        """
        c = Cochain.constant_form(PeriodicGrid.uniform(2, 8), 2, {(0, 1): 1})
        assert hinv_proxy(c) == pytest.approx(c.norm(), rel=1e-10)

    @staticmethod
    def test_compactness() -> None:
        r"""Test compactness.

        :rtype: None
        """
        schedule = epsilons([1, 2, 3])
        closed = OscillatoryFamily.uniform(2, 8, schedule, "sin")
        for row in compactness_diagnostic(closed, "d"):
            assert row.proxy == pytest.approx(0.0, abs=1e-12)
            assert row.l2 == pytest.approx(0.0, abs=1e-12)
        across = OscillatoryFamily.uniform(
            2, 8, schedule, "sin", direction=1
        )
        rows = compactness_diagnostic(across, "d")
        assert [row.epsilon for row in rows] == list(schedule)
        assert rows[-1].l2 > 3 * rows[0].l2
        for row in rows:
            assert 0.3 <= row.proxy <= 1.0
        with pytest.raises(ValueError):
            compactness_diagnostic(across, "curl")

    @staticmethod
    def test_equiintegrability() -> None:
        r"""Test equiintegrability.

        :rtype: None
        """
        fam = OscillatoryFamily.uniform(
            2, 8, epsilons([1, 2, 3]), "sin", min_cells_per_period=32
        )
        c = gen_oscillatory_form(fam, -1)
        tails = equiintegrability_diagnostic(c, c, [0.0, 0.25, 2.0])
        assert [threshold for threshold, _ in tails] == [0.0, 0.25, 2.0]
        assert tails[0][1] == pytest.approx(0.5, rel=0.05)
        assert 0.0 < tails[1][1] < tails[0][1]
        assert tails[2][1] == 0.0
