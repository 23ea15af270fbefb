r"""Rigidity experiments
========================

Developable bending families ``f^ε(x, y) = (γ^ε(x), y)`` of a flat strip,
where ``γ^ε`` is the unit-speed plane curve with tangent angle

``θ^ε(x) = κ_r x + κ₀ ε (1 − cos(x / ε))``

and so signed curvature ``κ_r + κ₀ sin(x / ε)``. Every member is isometric
to the flat strip; the family converges uniformly to the curve of angle
``κ_r x`` while its second fundamental form only converges weakly. The
report certifies that the limit is again an isometric immersion whose data
satisfies the compatibility and structural equations.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import NDArray

from . import CELLS_PER_PERIOD
from .cartan_realization import (
    FramePack,
    connection_forms,
    structural_residuals,
    volume_weights,
)
from .divcurl_lab import THRESHOLD_FACTORS, TestFunction, tail_masses
from .errors import GeometryError, ResolutionError, ShapeMismatchError
from .immersion_geometry import (
    Chart,
    FundamentalData,
    ImmersionField,
    fundamental_data,
    gcr_residuals,
    induced_metric,
    isometry_defect,
    sampling_defect,
)
from .utils import fit_order

logger = logging.getLogger(__name__)

Kind = Literal[
    "constant", "corrugated_strip", "oscillating_cylinder", "scaled_flat"
]
KINDS = ("constant", "corrugated_strip", "oscillating_cylinder", "scaled_flat")
IMMERSIVITY_BOUND = 0.5
QUADRATURE_POINTS, QUADRATURE_WEIGHTS = leggauss(8)
ISOMETRY_TOL = 1e-8
GCR_TOL = 1e-10
STRUCTURAL_TOL = 1e-10
MEMBER_STRUCTURAL_TOL = 1e-8

RIGIDITY_TESTS = {
    test.name: test
    for test in (
        TestFunction("one_plus_x", lambda *x: 1 + x[0]),
        TestFunction("one_plus_xy", lambda *x: 1 + x[0] * x[1]),
        TestFunction("one", lambda *x: np.ones_like(x[0])),
    )
}


def strip_chart(
    length: float = 1.0,
    height: float = 0.25,
    resolution: tuple[int, int] = (2048, 64),
) -> Chart:
    r"""Flat strip ``[0, L] × [0, H]``.

    :param length:
    :type length: float
    :param height:
    :type height: float
    :param resolution:
    :type resolution: tuple[int, int]
    :rtype: Chart
    """
    return Chart(2, 1, (0.0, 0.0), (length, height), tuple(resolution))


@dataclass(frozen=True, eq=False)
class BendingFamily:
    r"""A family of strip immersions along a decreasing ``ε`` schedule.

    ``curvature`` is the background ``κ_r`` of ``constant`` and
    ``oscillating_cylinder``; ``stretch`` is the factor ``1 + ε₀`` of the
    non-isometric ``scaled_flat`` control.
    """

    kind: Kind
    amplitude: float
    epsilons: tuple[float, ...]
    chart: Chart
    curvature: float = 0.0
    stretch: float = 1.0

    def __post_init__(self) -> None:
        r"""Check the immersivity and resolvability bounds.

        :rtype: None
        """
        object.__setattr__(self, "epsilons", tuple(self.epsilons))
        chart = self.chart
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if chart.dim != 2 or chart.codim != 1 or chart.periodic_axes:
            raise ShapeMismatchError("bending families live on a strip in R^3")
        if np.abs(chart.metric - np.eye(2)).max() > 0:
            raise GeometryError("the strip must carry the flat metric")
        if self.amplitude < 0:
            raise GeometryError("amplitude must be non-negative")
        if self.stretch <= 0:
            raise GeometryError("stretch must be positive")
        if not self.epsilons or np.any(np.diff(self.epsilons) >= 0):
            raise ResolutionError("ε schedule must be strictly decreasing")
        if min(self.epsilons) <= 0:
            raise ResolutionError("ε schedule must be positive")
        if self.amplitude * max(self.epsilons) >= IMMERSIVITY_BOUND:
            raise GeometryError(
                f"κ₀ ε = {self.amplitude * max(self.epsilons):g} breaks the "
                f"immersivity bound {IMMERSIVITY_BOUND}"
            )
        h = chart.spacing[0]
        if self.oscillates and (
            2 * np.pi * min(self.epsilons) < CELLS_PER_PERIOD * h - 1e-12
        ):
            raise ResolutionError(
                f"ε = {min(self.epsilons):g} spans fewer than "
                f"{CELLS_PER_PERIOD} cells of size {h:g}"
            )

    @property
    def oscillates(self) -> bool:
        r"""Whether members depend on ``ε``.

        :rtype: bool
        """
        return self.kind in {"corrugated_strip", "oscillating_cylinder"}

    def angle(
        self, x: NDArray[np.float64], epsilon: float | None
    ) -> NDArray[np.float64]:
        r"""Tangent angle; ``epsilon`` None gives the limit.

        :param x:
        :type x: NDArray[np.float64]
        :param epsilon:
        :type epsilon: float | None
        :rtype: NDArray[np.float64]
        """
        angle = self.curvature * x
        if self.oscillates and epsilon is not None:
            fast = 1 - np.cos(x / epsilon)
            angle = angle + self.amplitude * epsilon * fast
        return angle

    def signed_curvature(
        self, x: NDArray[np.float64], epsilon: float | None
    ) -> NDArray[np.float64]:
        r"""``dθ/dx``.

        :param x:
        :type x: NDArray[np.float64]
        :param epsilon:
        :type epsilon: float | None
        :rtype: NDArray[np.float64]
        """
        kappa = np.full_like(x, self.curvature)
        if self.oscillates and epsilon is not None:
            kappa = kappa + self.amplitude * np.sin(x / epsilon)
        return kappa

    def _immersion(self, epsilon: float | None) -> ImmersionField:
        chart = self.chart
        x, y = chart.coordinates()
        line = chart.axes[0]
        gamma = _curve(line, lambda s: self.angle(s, epsilon))
        theta = self.angle(x, epsilon)
        cos, sin = np.cos(theta), np.sin(theta)
        zero = np.zeros_like(x)
        scale = self.stretch if self.kind == "scaled_flat" else 1.0
        f = scale * np.stack(
            [gamma[:, 0][:, None] + zero, gamma[:, 1][:, None] + zero, y],
            axis=-1,
        )
        jacobian = scale * np.stack(
            [
                np.stack([cos, sin, zero], axis=-1),
                np.stack([zero, zero, np.ones_like(x)], axis=-1),
            ],
            axis=-1,
        )
        hint = np.stack([-sin, cos, zero], axis=-1)[..., None]
        return ImmersionField(chart, f, jacobian, hint)

    def member(self, k: int) -> ImmersionField:
        r"""Member ``k`` of the schedule.

        :param k:
        :type k: int
        :rtype: ImmersionField
        """
        return self._immersion(self.epsilons[k])

    def limit(self) -> ImmersionField:
        r"""The analytic uniform limit.

        :rtype: ImmersionField
        """
        return self._immersion(None)

    def limit_B(self) -> NDArray[np.float64]:
        r"""Weak limit of ``B^ε`` in coordinates, ``(*nodes, 1, 2, 2)``.

        The fast profile has mean zero, so only ``κ_r`` survives.

        :rtype: NDArray[np.float64]
        """
        B = np.zeros((*self.chart.resolution, 1, 2, 2))
        if self.kind != "scaled_flat":
            B[..., 0, 0, 0] = self.curvature
        return B

    def __len__(self) -> int:
        return len(self.epsilons)


def _curve(
    line: NDArray[np.float64],
    angle: Callable[[NDArray[np.float64]], NDArray[np.float64]],
) -> NDArray[np.float64]:
    r"""``γ(x) = ∫₀ˣ (cos θ, sin θ)`` at the nodes by per-cell Gauss
    quadrature."""
    left, right = line[:-1], line[1:]
    half = 0.5 * (right - left)
    centre = 0.5 * (left + right)
    points = centre[:, None] + half[:, None] * QUADRATURE_POINTS
    theta = angle(points)
    cells = np.stack(
        [
            half * (np.cos(theta) @ QUADRATURE_WEIGHTS),
            half * (np.sin(theta) @ QUADRATURE_WEIGHTS),
        ],
        axis=-1,
    )
    start = np.array([[line[0], 0.0]])
    return np.concatenate([start, start + np.cumsum(cells, axis=0)])


def corrugation_family(
    kappa0: float,
    schedule: list[float] | tuple[float, ...],
    chart: Chart,
) -> BendingFamily:
    r"""Strip bent with curvature ``κ₀ sin(x / ε)``.

    :param kappa0:
    :type kappa0: float
    :param schedule:
    :type schedule: list[float] | tuple[float, ...]
    :param chart:
    :type chart: Chart
    :rtype: BendingFamily
    """
    return BendingFamily("corrugated_strip", kappa0, tuple(schedule), chart)


def bending_family(
    kind: Kind,
    schedule: list[float] | tuple[float, ...],
    chart: Chart,
    amplitude: float = 1.0,
    curvature: float = 0.0,
    stretch: float = 1.1,
) -> BendingFamily:
    r"""Any family kind by name.

    :param kind:
    :type kind: Kind
    :param schedule:
    :type schedule: list[float] | tuple[float, ...]
    :param chart:
    :type chart: Chart
    :param amplitude:
    :type amplitude: float
    :param curvature:
    :type curvature: float
    :param stretch:
    :type stretch: float
    :rtype: BendingFamily
    """
    if kind == "corrugated_strip":
        return corrugation_family(amplitude, schedule, chart)
    if kind == "scaled_flat":
        return BendingFamily(kind, 0.0, tuple(schedule), chart, 0.0, stretch)
    if kind == "constant":
        return BendingFamily(kind, 0.0, tuple(schedule), chart, curvature)
    return BendingFamily(kind, amplitude, tuple(schedule), chart, curvature)


def _limit_data(
    fam: BendingFamily, f: ImmersionField
) -> tuple[Chart, FundamentalData]:
    r"""The chart of the limit metric and the limit frames carrying the
    analytic ``B̄`` and a trivial normal connection."""
    chart = fam.chart.with_metric(induced_metric(f))
    fd = fundamental_data(f)
    fd = replace(
        fd,
        chart=chart,
        B=fam.limit_B(),
        normal_conn=np.zeros_like(fd.normal_conn),
    )
    return chart, fd


def _frame_pack(
    f: ImmersionField, fd: FundamentalData | None = None
) -> FramePack:
    chart = f.chart.with_metric(induced_metric(f))
    fd = fundamental_data(f) if fd is None else fd
    return connection_forms(chart, replace(fd, chart=chart))


@dataclass(frozen=True)
class PairingRow:
    r"""``⟨B^ε_11 − B̄_11, ψ⟩`` for one ``(ε, ψ)``."""

    epsilon: float
    test_id: str
    pairing: float
    gap: float


@dataclass(frozen=True, eq=False)
class WeakLimit:
    r"""Limit immersion, ``B̄``, ``W̄`` and the pairing table."""

    f: ImmersionField
    B: NDArray[np.float64] = field(repr=False)
    W: FramePack = field(repr=False)
    fd: FundamentalData = field(repr=False)
    rows: tuple[PairingRow, ...]
    orders: dict[str, float | None]

    columns = ("epsilon", "test_id", "pairing", "gap", "order")

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
                self.orders[row.test_id],
            )
            for row in self.rows
        ]


def _tests(
    tests: list[TestFunction] | None,
) -> list[TestFunction]:
    if tests is None:
        return [RIGIDITY_TESTS["one_plus_x"], RIGIDITY_TESTS["one_plus_xy"]]
    return [RIGIDITY_TESTS[t] if isinstance(t, str) else t for t in tests]


def _pair(
    values: NDArray[np.float64],
    psi: NDArray[np.float64],
    weights: NDArray[np.float64],
) -> float:
    return float(np.sum(values * psi * weights))


def weak_limit_family(
    fam: BendingFamily, tests: list[TestFunction] | None = None
) -> WeakLimit:
    r"""Analytic limit of a family and the decay of ``⟨B^ε − B̄, ψ⟩``.

    :param fam:
    :type fam: BendingFamily
    :param tests: test functions of the chart coordinates
    :type tests: list[TestFunction] | None
    :rtype: WeakLimit
    """
    if len(fam) < 3:
        raise ResolutionError("a weak limit needs at least 3 schedule entries")
    tests = _tests(tests)
    chart = fam.chart
    weights = volume_weights(chart)
    coordinates = chart.coordinates()
    f_bar = fam.limit()
    chart_bar, fd_bar = _limit_data(fam, f_bar)
    W_bar = connection_forms(chart_bar, fd_bar)
    B_bar = fd_bar.B_frame[..., 0, 0, 0]
    psis = {test.name: test.func(*coordinates) for test in tests}
    limits = {name: _pair(B_bar, psi, weights) for name, psi in psis.items()}
    rows = []
    for k, epsilon in enumerate(fam.epsilons):
        B = fundamental_data(fam.member(k)).B_frame[..., 0, 0, 0]
        for name, psi in psis.items():
            pairing = _pair(B, psi, weights)
            rows.append(
                PairingRow(epsilon, name, pairing, pairing - limits[name])
            )
    orders = {
        name: fit_order(
            fam.epsilons,
            [row.gap for row in rows if row.test_id == name],
            max(abs(limits[name]), fam.amplitude),
        )
        for name in psis
    }
    logger.info("weak limit orders: %s", orders)
    return WeakLimit(
        f_bar, fam.limit_B(), W_bar, fd_bar, tuple(rows), orders
    )


@dataclass(frozen=True)
class MemberRow:
    r"""Hypothesis-side diagnostics of one member."""

    epsilon: float
    isometry: float
    b_l2: float
    b_sup: float
    c0_distance: float
    c0_bound: float
    sampling: float
    sampling_bound: float
    structural: float


@dataclass(frozen=True)
class Check:
    r"""A named limit check."""

    value: float
    tolerance: float
    passed: bool


@dataclass(frozen=True, eq=False)
class RigidityReport:
    r"""Per-member rows, the pairing table and the named limit checks.

    ``checks`` holds ``a_isometry``, ``b_gcr`` and ``c_structural`` on the
    limit, and ``d_member_structural`` on the members; ``tails`` holds the
    tail masses of ``|B^ε|²`` per member. The verdict only reads ``a``
    to ``c``.
    """

    kind: str
    rows: tuple[MemberRow, ...]
    limit: WeakLimit = field(repr=False)
    checks: dict[str, Check]
    tails: tuple[tuple[tuple[float, float], ...], ...]
    b_l2_bound: float

    columns = (
        "epsilon",
        "isometry",
        "b_l2",
        "b_sup",
        "c0_distance",
        "c0_bound",
        "sampling",
        "sampling_bound",
        "structural",
    )

    @property
    def verdict(self) -> bool:
        r"""Verdict.

        :rtype: bool
        """
        return all(
            self.checks[name].passed
            for name in ("a_isometry", "b_gcr", "c_structural")
        )

    @property
    def uniformly_bounded(self) -> bool:
        r"""``‖B^ε‖_{L²}`` stays under its bound for every member.

        :rtype: bool
        """
        return all(row.b_l2 <= self.b_l2_bound for row in self.rows)

    def table(self) -> list[tuple]:
        r"""Table.

        :rtype: list[tuple]
        """
        return [
            tuple(getattr(row, column) for column in self.columns)
            for row in self.rows
        ]

    def summary(self) -> dict:
        r"""Checks and flags as plain data.

        :rtype: dict
        """
        return {
            "kind": self.kind,
            "checks": {
                name: {
                    "value": check.value,
                    "tolerance": check.tolerance,
                    "pass": check.passed,
                }
                for name, check in self.checks.items()
            },
            "e_equiintegrability": [
                [list(tail) for tail in tails] for tails in self.tails
            ],
            "orders": self.limit.orders,
            "uniformly_bounded": self.uniformly_bounded,
            "verdict": self.verdict,
        }


def rigidity_report(
    fam: BendingFamily,
    tests: list[TestFunction] | None = None,
    isometry_tol: float = ISOMETRY_TOL,
    gcr_tol: float = GCR_TOL,
    structural_tol: float = STRUCTURAL_TOL,
    member_structural_tol: float = MEMBER_STRUCTURAL_TOL,
) -> RigidityReport:
    r"""Run the hypothesis-side and limit-side checks of a family.

    :param fam:
    :type fam: BendingFamily
    :param tests:
    :type tests: list[TestFunction] | None
    :param isometry_tol:
    :type isometry_tol: float
    :param gcr_tol:
    :type gcr_tol: float
    :param structural_tol:
    :type structural_tol: float
    :param member_structural_tol:
    :type member_structural_tol: float
    :rtype: RigidityReport
    """
    chart = fam.chart
    weights = volume_weights(chart)
    area = float(weights.sum())
    limit = weak_limit_family(fam, tests)
    mean_square = fam.curvature**2 + fam.amplitude**2 / 2
    thresholds = [factor * mean_square for factor in THRESHOLD_FACTORS]
    length = chart.upper[0] - chart.lower[0]
    h = chart.spacing[0]
    scale = fam.stretch if fam.kind == "scaled_flat" else 1.0
    slope = (abs(fam.curvature) + fam.amplitude) ** 2
    rows = []
    tails = []
    for k, epsilon in enumerate(fam.epsilons):
        member = fam.member(k)
        fd = fundamental_data(member)
        squared = np.sum(fd.B_frame**2, axis=(-3, -2, -1))
        structural = structural_residuals(_frame_pack(member, fd))
        rows.append(
            MemberRow(
                epsilon,
                isometry_defect(member)[0],
                float(np.sqrt(np.sum(squared * weights))),
                float(np.sqrt(squared.max())),
                float(np.abs(member.f - limit.f.f).max()),
                2 * fam.amplitude * epsilon * length,
                sampling_defect(member),
                # twice h² |γ‴| / 6 of central differences, plus round-off
                scale * h**2 * (fam.amplitude / epsilon + slope) / 3 + 1e-10,
                max(structural.sup.values()),
            )
        )
        tails.append(tuple(tail_masses(squared, weights, thresholds)))
    limit_chart = limit.W.chart
    checks = {}
    value = isometry_defect(limit.f)[0]
    checks["a_isometry"] = Check(value, isometry_tol, value <= isometry_tol)
    value = max(gcr_residuals(limit_chart, limit.fd).sup.values())
    checks["b_gcr"] = Check(value, gcr_tol, value <= gcr_tol)
    value = max(structural_residuals(limit.W).sup.values())
    checks["c_structural"] = Check(
        value, structural_tol, value <= structural_tol
    )
    value = max(row.structural for row in rows)
    checks["d_member_structural"] = Check(
        value, member_structural_tol, value <= member_structural_tol
    )
    report = RigidityReport(
        fam.kind,
        tuple(rows),
        limit,
        checks,
        tuple(tails),
        np.sqrt(mean_square * area) * (1 + 1e-2),
    )
    logger.info("rigidity %s: verdict %s", fam.kind, report.verdict)
    return report
