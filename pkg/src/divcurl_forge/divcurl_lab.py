r"""Div-curl lab
===============

Oscillatory families ``v(x) φ(x_dir / ε)`` of cochains, their analytic weak
limits, and the diagnostics that decide whether the pairing of two families
passes to the limit.

Fast profiles are ``2π``-periodic, so one fast period has length ``2πε``
and must span at least ``CELLS_PER_PERIOD`` cells of the fast axis.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from itertools import product
from math import ceil, log2, prod

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray
from scipy.ndimage import uniform_filter1d

from . import CELLS_PER_PERIOD
from .errors import DegreeError, ResolutionError, ShapeMismatchError
from .grid_complex import (
    AxisSet,
    Cochain,
    PeriodicGrid,
    codifferential,
    exterior_derivative,
    laplacian_matrix,
    mass_vector,
    node_product,
    pair_with_test,
)
from .solvers import lanczos_inverse_sqrt_norm
from .utils import fit_order

logger = logging.getLogger(__name__)

Field = Callable[..., NDArray[np.float64]]
GAUSS_POINTS, GAUSS_WEIGHTS = leggauss(4)
THRESHOLD_FACTORS = (1.0, 2.0, 4.0, 8.0)


def _periodic_moments(
    func: Callable, samples: int = 4096
) -> tuple[float, float]:
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    values = func(t)
    return float(np.mean(values)), float(np.mean(values**2))


@dataclass(frozen=True)
class Profile:
    r"""A ``2π``-periodic fast profile with its first two moments."""

    name: str
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]] = field(
        repr=False
    )
    mean: float
    second_moment: float

    def __post_init__(self) -> None:
        r"""Check the moments are finite.

        :rtype: None
        """
        if not np.isfinite(self.mean) or not np.isfinite(self.second_moment):
            raise ValueError(f"profile {self.name} has infinite moments")

    @classmethod
    def from_function(cls, name: str, func: Callable) -> "Profile":
        r"""Profile whose moments come from a periodic trapezoid rule.

        :param name:
        :type name: str
        :param func:
        :type func: Callable
        :rtype: "Profile"
        """
        return cls(name, func, *_periodic_moments(func))

    @property
    def variance(self) -> float:
        r"""Variance.

        :rtype: float
        """
        return self.second_moment - self.mean**2


PROFILES = {
    profile.name: profile
    for profile in (
        Profile("one", np.ones_like, 1.0, 1.0),
        Profile("sin", np.sin, 0.0, 0.5),
        Profile("cos", np.cos, 0.0, 0.5),
        Profile("sin2", lambda t: np.sin(t) ** 2, 0.5, 0.375),
        Profile("cos2", lambda t: np.cos(t) ** 2, 0.5, 0.375),
        Profile("shifted_sin", lambda t: 1 + 0.5 * np.sin(t), 1.0, 1.125),
        Profile("shifted_cos", lambda t: 1 + 0.5 * np.cos(t), 1.0, 1.125),
        Profile.from_function(
            "square_wave", lambda t: np.tanh(4 * np.sin(t))
        ),
    )
}

SLOW_PROFILES: dict[str, Field] = {
    "one": lambda *x: np.ones_like(x[0]),
    "bump": lambda *x: (
        1 + 0.5 * np.cos(2 * np.pi * x[0]) * np.cos(2 * np.pi * x[1])
    ),
    "sin_x": lambda *x: np.sin(2 * np.pi * x[0]),
    "sin_y": lambda *x: np.sin(2 * np.pi * x[1]),
}


@dataclass(frozen=True)
class TestFunction:
    r"""A named test function ``ψ``, sampled on each grid of a schedule."""

    __test__ = False
    name: str
    func: Field = field(repr=False)

    def sample(self, grid: PeriodicGrid) -> Cochain:
        r"""Sample.

        :param grid:
        :type grid: PeriodicGrid
        :rtype: Cochain
        """
        return Cochain.sample(grid, self.func)


def _hat(*x: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.prod(
        [np.clip(1 - 4 * np.abs(xi - 0.5), 0, None) for xi in x[:2]], axis=0
    )


TEST_FUNCTIONS = {
    test.name: test
    for test in (
        TestFunction("one", lambda *x: np.ones_like(x[0])),
        TestFunction("hat", _hat),
        TestFunction(
            "cos_x", lambda *x: 1 + 0.5 * np.cos(2 * np.pi * x[0])
        ),
    )
}


def resolution_schedule(
    dim: int,
    n: int,
    epsilons: list[float] | tuple[float, ...],
    direction: int = 0,
    length: float = 1.0,
    min_cells_per_period: int = CELLS_PER_PERIOD,
) -> tuple[tuple[int, ...], ...]:
    r"""Per-``ε`` resolutions: ``n`` cells per axis, refined along the fast
    axis (to a power of two) until a fast period spans
    ``min_cells_per_period`` cells.

    :param dim:
    :type dim: int
    :param n:
    :type n: int
    :param epsilons:
    :type epsilons: list[float] | tuple[float, ...]
    :param direction:
    :type direction: int
    :param length:
    :type length: float
    :param min_cells_per_period:
    :type min_cells_per_period: int
    :rtype: tuple[tuple[int, ...], ...]
    """
    schedule = []
    for epsilon in epsilons:
        needed = min_cells_per_period * length / (2 * np.pi * epsilon)
        needed *= 1 - 1e-12
        fast = max(n, 2 ** ceil(log2(max(needed, 1.0))))
        schedule.append(
            tuple(fast if axis == direction else n for axis in range(dim))
        )
    return tuple(schedule)


@dataclass(frozen=True)
class OscillatoryFamily:
    r"""``ε^p v(x) φ(x_dir / ε) dx_A`` along a decreasing ``ε`` schedule.

    ``resolutions`` holds one grid resolution per ``ε``.
    """

    dim: int
    resolutions: tuple[tuple[int, ...], ...]
    period: tuple[float, ...]
    slow_profile: Field = field(repr=False)
    fast_profile: Profile
    direction: int
    epsilons: tuple[float, ...]
    degree: int
    axis_set: AxisSet
    amplitude_power: int = 0

    def __post_init__(self) -> None:
        r"""Check invariants.

        :rtype: None
        """
        object.__setattr__(self, "epsilons", tuple(self.epsilons))
        object.__setattr__(
            self, "resolutions", tuple(map(tuple, self.resolutions))
        )
        object.__setattr__(self, "axis_set", tuple(self.axis_set))
        if len(self.resolutions) != len(self.epsilons):
            raise ShapeMismatchError(
                "one resolution is needed per schedule entry"
            )
        if not self.epsilons or np.any(np.diff(self.epsilons) >= 0):
            raise ResolutionError("ε schedule must be strictly decreasing")
        if not 0 <= self.direction < self.dim:
            raise ShapeMismatchError(
                f"direction {self.direction} out of range"
            )
        if not 0 <= self.degree <= self.dim:
            raise DegreeError(f"degree {self.degree} outside 0..{self.dim}")
        if (
            len(self.axis_set) != self.degree
            or list(self.axis_set) != sorted(set(self.axis_set))
            or not set(self.axis_set) <= set(range(self.dim))
        ):
            raise DegreeError(
                f"axis set {self.axis_set} does not name {self.degree} axes"
            )
        for k, epsilon in enumerate(self.epsilons):
            n = self.resolutions[k][self.direction]
            h = self.period[self.direction] / n
            if 2 * np.pi * epsilon < CELLS_PER_PERIOD * h - 1e-12:
                raise ResolutionError(
                    f"ε = {epsilon:g} spans fewer than {CELLS_PER_PERIOD} "
                    f"cells of size {h:g}"
                )

    @classmethod
    def uniform(
        cls,
        dim: int,
        n: int,
        epsilons: list[float] | tuple[float, ...],
        fast_profile: Profile | str,
        slow_profile: Field | str = "one",
        direction: int = 0,
        degree: int = 1,
        axis_set: AxisSet = (0,),
        amplitude_power: int = 0,
        min_cells_per_period: int = CELLS_PER_PERIOD,
    ) -> "OscillatoryFamily":
        r"""Family on the unit torus built from the named catalogs.

        :param dim:
        :type dim: int
        :param n:
        :type n: int
        :param epsilons:
        :type epsilons: list[float] | tuple[float, ...]
        :param fast_profile:
        :type fast_profile: Profile | str
        :param slow_profile:
        :type slow_profile: Field | str
        :param direction:
        :type direction: int
        :param degree:
        :type degree: int
        :param axis_set:
        :type axis_set: AxisSet
        :param amplitude_power:
        :type amplitude_power: int
        :param min_cells_per_period:
        :type min_cells_per_period: int
        :rtype: "OscillatoryFamily"
        """
        if isinstance(fast_profile, str):
            fast_profile = PROFILES[fast_profile]
        if isinstance(slow_profile, str):
            slow_profile = SLOW_PROFILES[slow_profile]
        return cls(
            dim,
            resolution_schedule(
                dim, n, epsilons, direction, 1.0, min_cells_per_period
            ),
            (1.0,) * dim,
            slow_profile,
            fast_profile,
            direction,
            tuple(epsilons),
            degree,
            tuple(axis_set),
            amplitude_power,
        )

    def grid(self, k: int) -> PeriodicGrid:
        r"""Grid of schedule entry ``k``.

        :param k:
        :type k: int
        :rtype: PeriodicGrid
        """
        return PeriodicGrid(self.dim, self.resolutions[k], self.period)

    def __len__(self) -> int:
        return len(self.epsilons)


def _integrate(
    grid: PeriodicGrid, axis_set: AxisSet, integrand: Field
) -> NDArray[np.float64]:
    r"""4-point Gauss-Legendre integral over every cell of ``axis_set``."""
    h = grid.spacing
    corners = grid.coordinates()
    total = np.zeros(grid.resolution)
    for points in product(range(GAUSS_POINTS.size), repeat=len(axis_set)):
        coordinates = list(corners)
        weight = 1.0
        for axis, point in zip(axis_set, points, strict=True):
            coordinates[axis] = (
                corners[axis] + 0.5 * h[axis] * (1 + GAUSS_POINTS[point])
            )
            weight *= 0.5 * h[axis] * GAUSS_WEIGHTS[point]
        total += weight * np.broadcast_to(
            integrand(*coordinates), grid.resolution
        )
    return total


def _check_index(fam: OscillatoryFamily, k: int) -> int:
    if not -len(fam) <= k < len(fam):
        raise IndexError(f"schedule index {k} outside 0..{len(fam) - 1}")
    return k % len(fam)


def gen_oscillatory_form(fam: OscillatoryFamily, k: int) -> Cochain:
    r"""Cell integrals of ``ε^p v(x) φ(x_dir / ε)`` over the ``A``-cells.

    :param fam:
    :type fam: OscillatoryFamily
    :param k:
    :type k: int
    :rtype: Cochain
    """
    k = _check_index(fam, k)
    epsilon = fam.epsilons[k]
    scale = epsilon**fam.amplitude_power

    def integrand(*x: NDArray[np.float64]) -> NDArray[np.float64]:
        return (
            scale
            * fam.slow_profile(*x)
            * fam.fast_profile.func(x[fam.direction] / epsilon)
        )

    grid = fam.grid(k)
    block = _integrate(grid, fam.axis_set, integrand)
    return Cochain.from_blocks(grid, fam.degree, {fam.axis_set: block})


def weak_limit(fam: OscillatoryFamily, k: int = -1) -> Cochain:
    r"""Cochain of ``v(x) mean(φ)`` (zero when the amplitude vanishes with
    ``ε``) on the grid of schedule entry ``k``.

    :param fam:
    :type fam: OscillatoryFamily
    :param k:
    :type k: int
    :rtype: Cochain
    """
    k = _check_index(fam, k)
    mean = fam.fast_profile.mean if fam.amplitude_power == 0 else 0.0
    grid = fam.grid(k)
    block = _integrate(
        grid, fam.axis_set, lambda *x: mean * fam.slow_profile(*x)
    )
    return Cochain.from_blocks(grid, fam.degree, {fam.axis_set: block})


def averaging_estimator(fam: OscillatoryFamily, k: int = -1) -> Cochain:
    r"""Estimate the weak limit by a moving average over one fast period.

    Only meant to cross-check :func:`weak_limit`.

    :param fam:
    :type fam: OscillatoryFamily
    :param k:
    :type k: int
    :rtype: Cochain
    """
    k = _check_index(fam, k)
    c = gen_oscillatory_form(fam, k)
    grid = c.grid
    h = grid.spacing[fam.direction]
    window = max(1, round(2 * np.pi * fam.epsilons[k] / h))
    block = uniform_filter1d(
        c.block(fam.axis_set), window, axis=fam.direction, mode="wrap"
    )
    return Cochain.from_blocks(grid, fam.degree, {fam.axis_set: block})


@dataclass(frozen=True)
class CompactnessRow:
    r"""``H⁻¹`` proxy and ``L²`` norm of ``d c^ε`` or ``δ c^ε``."""

    epsilon: float
    proxy: float
    l2: float


def _apply_operator(c: Cochain, which: str) -> Cochain:
    if which == "d":
        if c.degree == c.grid.dim:
            raise DegreeError("d of a top-degree family is undefined")
        return exterior_derivative(c)
    if which == "delta":
        if c.degree == 0:
            raise DegreeError("δ of a 0-form family is undefined")
        return codifferential(c)
    raise ValueError(f"which must be 'd' or 'delta', got {which!r}")


def hinv_proxy(c: Cochain, steps: int = 5) -> float:
    r"""``‖(Δ + I)^{-1/2} c‖`` by a short Lanczos recurrence.

    :param c:
    :type c: Cochain
    :param steps:
    :type steps: int
    :rtype: float
    """
    laplacian = laplacian_matrix(c.grid, c.degree)
    return lanczos_inverse_sqrt_norm(
        lambda x: laplacian @ x + x,
        c.values,
        mass_vector(c.grid, c.degree),
        steps,
    )


def compactness_diagnostic(
    fam: OscillatoryFamily, which: str = "d"
) -> list[CompactnessRow]:
    r"""Per ``ε``, the ``H⁻¹`` proxy and ``L²`` norm of ``op c^ε``.

    :param fam:
    :type fam: OscillatoryFamily
    :param which: ``"d"`` or ``"delta"``
    :type which: str
    :rtype: list[CompactnessRow]
    """
    rows = []
    for k, epsilon in enumerate(fam.epsilons):
        image = _apply_operator(gen_oscillatory_form(fam, k), which)
        rows.append(CompactnessRow(epsilon, hinv_proxy(image), image.norm()))
        logger.debug(
            "%s proxy at ε=%g: %.6g", which, epsilon, rows[-1].proxy
        )
    return rows


def tail_masses(
    magnitude: NDArray[np.float64],
    weight: float | NDArray[np.float64],
    thresholds: list[float],
) -> list[tuple[float, float]]:
    r"""``Σ w |v|`` over the nodes where ``|v|`` exceeds each threshold.

    :param magnitude:
    :type magnitude: NDArray[np.float64]
    :param weight: one volume for all nodes or one per node
    :type weight: float | NDArray[np.float64]
    :param thresholds:
    :type thresholds: list[float]
    :rtype: list[tuple[float, float]]
    """
    weight = np.ravel(np.broadcast_to(weight, np.shape(magnitude)))
    magnitude = np.abs(np.ravel(magnitude))
    order = np.argsort(magnitude)
    ordered = magnitude[order]
    # suffix sums give every tail with one sort
    weighted = (ordered * weight[order])[::-1]
    suffix = np.concatenate([np.cumsum(weighted)[::-1], [0.0]])
    result = []
    for threshold in thresholds:
        start = np.searchsorted(ordered, threshold, side="right")
        result.append((float(threshold), float(suffix[start])))
    return result


def equiintegrability_diagnostic(
    omega_k: Cochain, tau_k: Cochain, thresholds: list[float]
) -> list[tuple[float, float]]:
    r"""Tail masses ``∫_{|⟨ω,τ⟩| > M} |⟨ω,τ⟩| dV`` of the node product.

    Only the equi-integrability side of the ``W^{-1,1}`` endpoint is
    measured; compactness in ``W^{-1,1}`` has no finite proxy here.

    :param omega_k:
    :type omega_k: Cochain
    :param tau_k:
    :type tau_k: Cochain
    :param thresholds:
    :type thresholds: list[float]
    :rtype: list[tuple[float, float]]
    """
    magnitude = np.abs(node_product(omega_k, tau_k))
    return tail_masses(magnitude, prod(omega_k.grid.spacing), thresholds)


@dataclass(frozen=True)
class DivCurlRow:
    r"""One ``(ε, ψ)`` entry of a div-curl experiment."""

    epsilon: float
    test_id: str
    pairing: float
    gap: float
    dproxy: float | None
    deltaproxy: float | None


@dataclass(frozen=True)
class ConvergenceReport:
    r"""Pairings against their predicted limits, ordered by ``ε``."""

    rows: tuple[DivCurlRow, ...]
    orders: dict[str, float | None]
    limits: dict[str, float]
    tails: tuple[tuple[tuple[float, float], ...], ...]

    columns = (
        "epsilon",
        "test_id",
        "pairing",
        "gap",
        "dproxy",
        "deltaproxy",
        "order",
    )

    def table(self) -> list[tuple]:
        r"""Table.

        :rtype: list[tuple]
        """
        return [
            (
                row.epsilon,
                row.test_id,
                row.pairing,
                row.gap,
                row.dproxy,
                row.deltaproxy,
                self.orders[row.test_id],
            )
            for row in self.rows
        ]

    def gaps(self, test_id: str) -> list[float]:
        r"""Gaps of one test function along the schedule.

        :param test_id:
        :type test_id: str
        :rtype: list[float]
        """
        return [row.gap for row in self.rows if row.test_id == test_id]

    def proxies(self, which: str) -> list[float | None]:
        r"""``dproxy`` or ``deltaproxy`` per ``ε``.

        :param which:
        :type which: str
        :rtype: list[float | None]
        """
        first = self.rows[0].test_id
        return [
            getattr(row, which) for row in self.rows if row.test_id == first
        ]


def _check_compatible(
    omega: OscillatoryFamily, tau: OscillatoryFamily
) -> None:
    if (
        omega.resolutions != tau.resolutions
        or omega.period != tau.period
        or not np.allclose(omega.epsilons, tau.epsilons, rtol=1e-14)
    ):
        raise ShapeMismatchError("families do not share a schedule")
    if omega.degree != tau.degree:
        raise DegreeError(
            f"cannot pair degrees {omega.degree} and {tau.degree}"
        )


def divcurl_experiment(
    omega: OscillatoryFamily,
    tau: OscillatoryFamily,
    tests: list[TestFunction],
    thresholds: tuple[float, ...] = THRESHOLD_FACTORS,
) -> ConvergenceReport:
    r"""Pair two families against test functions along their schedule.

    For every ``ε`` and ``ψ`` the pairing ``∫⟨ω^ε, τ^ε⟩ψ`` is compared with
    the pairing of the weak limits. The ``dproxy`` column follows ``dω^ε``,
    ``deltaproxy`` follows ``δτ^ε``; tails are taken at ``thresholds``
    times the mean of ``|⟨ω^ε, τ^ε⟩|``.

    :param omega:
    :type omega: OscillatoryFamily
    :param tau:
    :type tau: OscillatoryFamily
    :param tests:
    :type tests: list[TestFunction]
    :param thresholds:
    :type thresholds: tuple[float, ...]
    :rtype: ConvergenceReport
    """
    _check_compatible(omega, tau)
    if not tests:
        raise ValueError("at least one test function is needed")
    rows = []
    tails = []
    limits: dict[str, float] = {}
    gaps: dict[str, list[float]] = {test.name: [] for test in tests}
    for k, epsilon in enumerate(omega.epsilons):
        omega_k = gen_oscillatory_form(omega, k)
        tau_k = gen_oscillatory_form(tau, k)
        omega_bar = weak_limit(omega, k)
        tau_bar = weak_limit(tau, k)
        dproxy = (
            hinv_proxy(exterior_derivative(omega_k))
            if omega.degree < omega.dim
            else None
        )
        deltaproxy = (
            hinv_proxy(codifferential(tau_k)) if tau.degree > 0 else None
        )
        for test in tests:
            psi = test.sample(omega_k.grid)
            pairing = pair_with_test(omega_k, tau_k, psi)
            limit = pair_with_test(omega_bar, tau_bar, psi)
            limits[test.name] = limit
            gap = abs(pairing - limit)
            gaps[test.name].append(gap)
            rows.append(
                DivCurlRow(
                    epsilon, test.name, pairing, gap, dproxy, deltaproxy
                )
            )
        mean = float(np.mean(np.abs(node_product(omega_k, tau_k))))
        tails.append(
            tuple(
                equiintegrability_diagnostic(
                    omega_k, tau_k, [factor * mean for factor in thresholds]
                )
            )
        )
        logger.info("div-curl row ε=%g done", epsilon)
    orders = {
        name: fit_order(omega.epsilons, values, abs(limits[name]))
        for name, values in gaps.items()
    }
    return ConvergenceReport(tuple(rows), orders, limits, tuple(tails))
