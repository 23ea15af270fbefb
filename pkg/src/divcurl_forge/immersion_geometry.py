r"""Immersion geometry
======================

Chart-local geometry of sampled metrics and immersions. Node axes always
lead every field array; tensor indices trail them.

Conventions:

- ``R(X, Y, Z, W) = ⟨R(X, Y)Z, W⟩`` with
  ``R(X, Y) = ∇_X ∇_Y − ∇_Y ∇_X − ∇_{[X, Y]}``, so a round sphere has
  ``R(∂₁, ∂₂, ∂₂, ∂₁) > 0``.
- ``X_a = c[i, a] ∂_i`` is the orthonormal tangent frame and ``η_α`` the
  normal frame; ``B[α, i, j] = η_α · ∂_i ∂_j f`` and
  ``normal_conn[j, α, β] = ⟨∂_j η_α, η_β⟩``.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import prod

import numpy as np
from numpy.typing import NDArray

from .errors import GeometryError, ShapeMismatchError

logger = logging.getLogger(__name__)

MARGIN = 2
METRIC_FLOOR = 1e-8
RANK_FLOOR = 1e-6
FRAME_CONTINUITY = 0.9


def _node(index: int | np.integer, shape: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(int(index), shape))


@dataclass(frozen=True, eq=False)
class Chart:
    r"""Axis-aligned box sampled at nodes, carrying a metric per node.

    Periodic axes exclude their upper bound; the others include both.
    """

    dim: int
    codim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    resolution: tuple[int, ...]
    periodic_axes: frozenset[int] = frozenset()
    metric: NDArray[np.float64] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        r"""Check invariants.

        :rtype: None
        """
        object.__setattr__(
            self, "periodic_axes", frozenset(self.periodic_axes)
        )
        object.__setattr__(self, "resolution", tuple(self.resolution))
        if self.dim not in {2, 3}:
            raise ShapeMismatchError(f"dim must be 2 or 3, got {self.dim}")
        if self.codim < 1:
            raise ShapeMismatchError(f"codim must be >= 1, got {self.codim}")
        if not (
            len(self.lower) == len(self.upper) == len(self.resolution)
            == self.dim
        ):
            raise ShapeMismatchError("bounds and resolution need dim entries")
        if min(self.resolution) < 8:
            raise ShapeMismatchError(
                f"every axis needs at least 8 nodes: {self.resolution}"
            )
        if any(b <= a for a, b in zip(self.lower, self.upper, strict=True)):
            raise ShapeMismatchError("empty chart domain")
        metric = (
            np.broadcast_to(np.eye(self.dim), self.node_shape)
            if self.metric is None
            else np.asarray(self.metric, dtype=np.float64)
        )
        if metric.shape != self.node_shape:
            raise ShapeMismatchError(
                f"metric must have shape {self.node_shape}, got {metric.shape}"
            )
        asymmetry = np.abs(metric - np.swapaxes(metric, -1, -2)).max()
        if asymmetry > 1e-12 * max(np.abs(metric).max(), 1.0):
            raise GeometryError(f"metric is not symmetric ({asymmetry:.3e})")
        eigenvalues = np.linalg.eigvalsh(metric)[..., 0]
        if eigenvalues.min() <= METRIC_FLOOR:
            raise GeometryError(
                "metric is not positive-definite",
                _node(np.argmin(eigenvalues), self.resolution),
            )
        metric = np.array(metric)
        metric.flags.writeable = False
        object.__setattr__(self, "metric", metric)

    @property
    def ambient_dim(self) -> int:
        r"""Ambient dim.

        :rtype: int
        """
        return self.dim + self.codim

    @property
    def node_shape(self) -> tuple[int, ...]:
        r"""Node shape.

        :rtype: tuple[int, ...]
        """
        return (*self.resolution, self.dim, self.dim)

    @property
    def spacing(self) -> tuple[float, ...]:
        r"""Spacing.

        :rtype: tuple[float, ...]
        """
        return tuple(
            (b - a) / (n if axis in self.periodic_axes else n - 1)
            for axis, (a, b, n) in enumerate(
                zip(self.lower, self.upper, self.resolution, strict=True)
            )
        )

    @property
    def axes(self) -> tuple[NDArray[np.float64], ...]:
        r"""Node coordinates along each axis.

        :rtype: tuple[NDArray[np.float64], ...]
        """
        return tuple(
            a + h * np.arange(n)
            for a, h, n in zip(
                self.lower, self.spacing, self.resolution, strict=True
            )
        )

    def coordinates(self) -> tuple[NDArray[np.float64], ...]:
        r"""Coordinates.

        :rtype: tuple[NDArray[np.float64], ...]
        """
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @property
    def cell_volume(self) -> float:
        r"""Cell volume.

        :rtype: float
        """
        return prod(self.spacing)

    def interior(self, margin: int = MARGIN) -> tuple[slice, ...]:
        r"""Node slices leaving out ``margin`` nodes at non-periodic ends.

        :param margin:
        :type margin: int
        :rtype: tuple[slice, ...]
        """
        return tuple(
            slice(None)
            if axis in self.periodic_axes
            else slice(margin, n - margin)
            for axis, n in enumerate(self.resolution)
        )

    def with_metric(self, metric: NDArray[np.float64]) -> "Chart":
        r"""The same box with another metric.

        :param metric:
        :type metric: NDArray[np.float64]
        :rtype: "Chart"
        """
        return Chart(
            self.dim,
            self.codim,
            self.lower,
            self.upper,
            self.resolution,
            self.periodic_axes,
            metric,
        )


def partial(
    values: NDArray[np.float64], chart: Chart, axis: int, order: int = 2
) -> NDArray[np.float64]:
    r"""Derivative along a node axis.

    ``order`` 4 uses the five-point central stencil with one-sided
    five-point stencils at non-periodic ends; ``order`` 2 uses central
    differences with second-order one-sided ends.

    :param values: node axes first
    :type values: NDArray[np.float64]
    :param chart:
    :type chart: Chart
    :param axis:
    :type axis: int
    :param order: 2 or 4
    :type order: int
    :rtype: NDArray[np.float64]
    """
    values = np.asarray(values, dtype=np.float64)
    h = chart.spacing[axis]
    if axis in chart.periodic_axes:
        forward = np.roll(values, -1, axis) - np.roll(values, 1, axis)
        if order == 2:
            return forward / (2 * h)
        wide = np.roll(values, -2, axis) - np.roll(values, 2, axis)
        return (8 * forward - wide) / (12 * h)
    if order == 2:
        return np.gradient(values, h, axis=axis, edge_order=2)
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[2:-2] = (8 * (v[3:-1] - v[1:-3]) - (v[4:] - v[:-4])) / (12 * h)
    out[0] = (
        -25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]
    ) / (12 * h)
    out[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h)
    out[-1] = (
        25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]
    ) / (12 * h)
    out[-2] = (
        3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]
    ) / (12 * h)
    return np.moveaxis(out, 0, axis)


def gradient(
    values: NDArray[np.float64], chart: Chart, order: int = 2
) -> NDArray[np.float64]:
    r"""All partial derivatives, stacked on a new axis right after the
    node axes.

    :param values:
    :type values: NDArray[np.float64]
    :param chart:
    :type chart: Chart
    :param order:
    :type order: int
    :rtype: NDArray[np.float64]
    """
    return np.stack(
        [partial(values, chart, axis, order) for axis in range(chart.dim)],
        axis=chart.dim,
    )


@dataclass(frozen=True, eq=False)
class ImmersionField:
    r"""Points ``f`` in ``ℝ^{n+k}`` per node of a chart.

    ``jacobian`` may carry ``∂_i f`` in closed form, shaped
    ``(*nodes, n + k, n)``; it then replaces finite differences of ``f``.
    ``normal_hint`` holds ``k`` reference vectors, constant or per node,
    seeding the normal frame.
    """

    chart: Chart
    f: NDArray[np.float64] = field(repr=False)
    jacobian: NDArray[np.float64] | None = field(default=None, repr=False)
    normal_hint: NDArray[np.float64] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        r"""Check the shape and the rank of ``df``.

        :rtype: None
        """
        shape = (*self.chart.resolution, self.chart.ambient_dim)
        f = np.asarray(self.f, dtype=np.float64)
        if f.shape != shape:
            raise ShapeMismatchError(
                f"f must have shape {shape}, got {f.shape}"
            )
        object.__setattr__(self, "f", f)
        if self.jacobian is not None:
            jacobian = np.asarray(self.jacobian, dtype=np.float64)
            if jacobian.shape != (*shape, self.chart.dim):
                raise ShapeMismatchError("jacobian has the wrong shape")
            object.__setattr__(self, "jacobian", jacobian)
        sigma = np.linalg.svd(self.differential(), compute_uv=False)[..., -1]
        interior = sigma[self.chart.interior(1)]
        if interior.min() <= RANK_FLOOR:
            index = np.unravel_index(np.argmin(interior), interior.shape)
            offset = [
                0 if axis in self.chart.periodic_axes else 1
                for axis in range(self.chart.dim)
            ]
            raise GeometryError(
                "df is rank deficient",
                tuple(int(i + o) for i, o in zip(index, offset, strict=True)),
            )

    def differential(self) -> NDArray[np.float64]:
        r"""``J[..., a, i] = ∂_i f^a``.

        :rtype: NDArray[np.float64]
        """
        if self.jacobian is not None:
            return self.jacobian
        return np.moveaxis(gradient(self.f, self.chart, 4), self.chart.dim, -1)

    def hessian(self) -> NDArray[np.float64]:
        r"""``H[..., a, i, j] = ∂_i ∂_j f^a``, symmetrized in ``i, j``.

        :rtype: NDArray[np.float64]
        """
        n = self.chart.dim
        jacobian = self.differential()
        # d[..., j, a, i] = ∂_j ∂_i f^a
        d = gradient(jacobian, self.chart, 4)
        hessian = np.moveaxis(d, n, -1)
        return 0.5 * (hessian + np.swapaxes(hessian, -1, -2))

    def hints(self) -> NDArray[np.float64]:
        r"""Reference vectors per node, shaped ``(*nodes, n + k, k)``.

        Defaults to the last ``k`` standard basis vectors.

        :rtype: NDArray[np.float64]
        """
        chart = self.chart
        if self.normal_hint is None:
            hint = np.eye(chart.ambient_dim)[:, chart.dim :]
        else:
            hint = np.asarray(self.normal_hint, dtype=np.float64)
        return np.broadcast_to(
            hint, (*chart.resolution, chart.ambient_dim, chart.codim)
        )


def induced_metric(f: ImmersionField) -> NDArray[np.float64]:
    r"""``g_ij = ∂_i f · ∂_j f``.

    :param f:
    :type f: ImmersionField
    :rtype: NDArray[np.float64]
    """
    jacobian = f.differential()
    return np.einsum("...ai,...aj->...ij", jacobian, jacobian)


def _aggregate(
    values: NDArray[np.float64], chart: Chart, margin: int = MARGIN
) -> tuple[float, float]:
    interior = np.abs(values[chart.interior(margin)])
    if interior.size == 0:
        return 0.0, 0.0
    sup = float(interior.max())
    l2 = float(np.sqrt(np.sum(interior**2) * chart.cell_volume))
    return sup, l2


def isometry_defect(
    f: ImmersionField, g: NDArray[np.float64] | None = None
) -> tuple[float, float]:
    r"""Sup and ``L²`` norms of ``induced_metric(f) − g`` on interior nodes.

    :param f:
    :type f: ImmersionField
    :param g: defaults to the metric of the chart
    :type g: NDArray[np.float64] | None
    :rtype: tuple[float, float]
    """
    g = f.chart.metric if g is None else np.asarray(g)
    if g.shape != f.chart.node_shape:
        raise ShapeMismatchError(
            f"metric must have shape {f.chart.node_shape}, got {g.shape}"
        )
    return _aggregate(induced_metric(f) - g, f.chart)


def sampling_defect(f: ImmersionField) -> float:
    r"""Sup over interior nodes of central differences of ``f`` minus the
    closed-form ``jacobian``; zero when ``f`` carries none.

    :param f:
    :type f: ImmersionField
    :rtype: float
    """
    if f.jacobian is None:
        return 0.0
    sampled = np.moveaxis(gradient(f.f, f.chart, 2), f.chart.dim, -1)
    return _aggregate(sampled - f.jacobian, f.chart)[0]


@dataclass(frozen=True, eq=False)
class Curvature:
    r"""Christoffel symbols ``Γ[k, i, j] = Γ^k_ij`` and
    ``riemann[a, b, c, d] = R(∂_a, ∂_b, ∂_c, ∂_d)``.

    ``antisymmetry_defect`` measures ``R_abcd + R_abdc`` before the tensor
    is projected onto its algebraic symmetries; ``bianchi_defect`` is the
    first Bianchi residual after it. Both are relative to ``max |R|``.
    """

    chart: Chart
    christoffel: NDArray[np.float64] = field(repr=False)
    riemann: NDArray[np.float64] = field(repr=False)
    antisymmetry_defect: float
    bianchi_defect: float


def christoffel_symbols(
    chart: Chart, metric: NDArray[np.float64] | None = None
) -> NDArray[np.float64]:
    r"""``Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)``.

    :param chart:
    :type chart: Chart
    :param metric:
    :type metric: NDArray[np.float64] | None
    :rtype: NDArray[np.float64]
    """
    g = chart.metric if metric is None else metric
    # t[..., i, j, l] = ∂_i g_jl
    t = gradient(g, chart, 4)
    lowered = t + np.swapaxes(t, -3, -2) - np.moveaxis(t, -3, -1)
    return 0.5 * np.einsum("...kl,...ijl->...kij", np.linalg.inv(g), lowered)


def riemann_curvature(chart: Chart) -> Curvature:
    r"""Riemann tensor of the chart metric.

    :param chart:
    :type chart: Chart
    :rtype: Curvature
    """
    g = chart.metric
    gamma = christoffel_symbols(chart)
    # dgamma[..., m, k, i, j] = ∂_m Γ^k_ij
    dgamma = gradient(gamma, chart, 2)
    upper = (
        np.einsum("...kilj->...ijkl", dgamma)
        - np.einsum("...likj->...ijkl", dgamma)
        + np.einsum("...ikm,...mlj->...ijkl", gamma, gamma)
        - np.einsum("...ilm,...mkj->...ijkl", gamma, gamma)
    )
    raw = np.einsum("...dm,...mcab->...abcd", g, upper)
    scale = max(float(np.abs(raw).max()), 1e-300)
    antisymmetry = float(
        np.abs(raw + np.swapaxes(raw, -1, -2)).max() / scale
    )
    riemann = 0.5 * (raw - np.swapaxes(raw, -1, -2))
    riemann = 0.5 * (riemann + np.einsum("...abcd->...cdab", riemann))
    bianchi = (
        riemann
        + np.einsum("...abcd->...acdb", riemann)
        + np.einsum("...abcd->...adbc", riemann)
    )
    bianchi_defect = float(np.abs(bianchi).max() / scale)
    logger.debug(
        "curvature: antisymmetry %.3e bianchi %.3e",
        antisymmetry,
        bianchi_defect,
    )
    return Curvature(chart, gamma, riemann, antisymmetry, bianchi_defect)


def sectional_curvature(
    curvature: Curvature, plane: tuple[int, int] = (0, 1)
) -> NDArray[np.float64]:
    r"""``R(∂_i, ∂_j, ∂_j, ∂_i) / (g_ii g_jj − g_ij²)``.

    :param curvature:
    :type curvature: Curvature
    :param plane:
    :type plane: tuple[int, int]
    :rtype: NDArray[np.float64]
    """
    i, j = plane
    g = curvature.chart.metric
    area = g[..., i, i] * g[..., j, j] - g[..., i, j] ** 2
    return curvature.riemann[..., i, j, j, i] / area


def _orthonormal_columns(
    matrix: NDArray[np.float64],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    q, r = np.linalg.qr(matrix)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :], r * signs[..., :, None]


def _align_signs(normal: NDArray[np.float64], dim: int) -> None:
    r"""Flip normals in place so neighbors agree along a row-major sweep."""
    for axis in range(dim):
        # lines along axis, at index 0 of every later axis
        head = tuple(
            slice(None) if a <= axis else slice(0, 1) for a in range(dim)
        )
        line = normal[head]
        size = line.shape[axis]
        ahead = np.take(line, range(1, size), axis=axis)
        behind = np.take(line, range(size - 1), axis=axis)
        dots = np.sum(ahead * behind, axis=-2)
        flips = np.cumprod(np.where(dots < 0, -1.0, 1.0), axis=axis)
        first = np.ones_like(np.take(flips, [0], axis=axis))
        line *= np.concatenate([first, flips], axis=axis)[..., None, :]


def _check_continuity(
    frame: NDArray[np.float64], chart: Chart, name: str
) -> None:
    for axis in range(chart.dim):
        ahead = np.take(frame, range(1, frame.shape[axis]), axis=axis)
        behind = np.take(frame, range(frame.shape[axis] - 1), axis=axis)
        dots = np.sum(ahead * behind, axis=-2).min(axis=-1)
        if dots.min() < FRAME_CONTINUITY:
            raise GeometryError(
                f"{name} frame jumps between neighbors along axis {axis}; "
                "refine the resolution",
                _node(np.argmin(dots), dots.shape),
            )


@dataclass(frozen=True, eq=False)
class FundamentalData:
    r"""Frames, second fundamental form and normal connection of an
    immersion.

    ``tangent[..., :, a]`` is ``X_a`` in ambient coordinates,
    ``coefficients[..., i, a]`` writes ``X_a = c[i, a] ∂_i`` and
    ``dual[..., a, i]`` writes ``∂_i = dual[a, i] X_a``.
    """

    chart: Chart
    tangent: NDArray[np.float64] = field(repr=False)
    coefficients: NDArray[np.float64] = field(repr=False)
    dual: NDArray[np.float64] = field(repr=False)
    normal: NDArray[np.float64] = field(repr=False)
    B: NDArray[np.float64] = field(repr=False)
    normal_conn: NDArray[np.float64] = field(repr=False)

    @property
    def codim(self) -> int:
        r"""Codim.

        :rtype: int
        """
        return self.normal.shape[-1]

    def frame_derivative(
        self, values: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        r"""``X_a F`` stacked on a new axis after the node axes.

        :param values:
        :type values: NDArray[np.float64]
        :rtype: NDArray[np.float64]
        """
        n = self.chart.dim
        derivative = gradient(values, self.chart, 2)
        shape = derivative.shape
        flat = derivative.reshape(*shape[: n + 1], -1)
        result = np.einsum("...ia,...ir->...ar", self.coefficients, flat)
        return result.reshape(shape)

    @cached_property
    def bracket(self) -> NDArray[np.float64]:
        r"""``[X_a, X_b] = L[a, b, e] X_e``.

        :rtype: NDArray[np.float64]
        """
        # dc[..., m, i, b] = ∂_m c[i, b]
        dc = gradient(self.coefficients, self.chart, 2)
        along = np.einsum("...ma,...mib->...aib", self.coefficients, dc)
        coordinate = along - np.einsum("...aib->...bia", along)
        return np.einsum("...ei,...aib->...abe", self.dual, coordinate)

    @cached_property
    def connection(self) -> NDArray[np.float64]:
        r"""``∇_{X_a} X_b = Γf[a, b, e] X_e`` from the Koszul formula.

        :rtype: NDArray[np.float64]
        """
        L = self.bracket
        return 0.5 * (
            L
            - np.einsum("...bea->...abe", L)
            + np.einsum("...eab->...abe", L)
        )

    @cached_property
    def divergence(self) -> NDArray[np.float64]:
        r"""``div X_a = Σ_e ⟨∇_{X_e} X_a, X_e⟩``.

        :rtype: NDArray[np.float64]
        """
        return np.einsum("...eae->...a", self.connection)

    @cached_property
    def B_frame(self) -> NDArray[np.float64]:
        r"""``B(X_a, X_b, η_α)`` as ``[α, a, b]``.

        :rtype: NDArray[np.float64]
        """
        c = self.coefficients
        return np.einsum("...ia,...jb,...pij->...pab", c, c, self.B)

    @cached_property
    def N_frame(self) -> NDArray[np.float64]:
        r"""``⟨∇⊥_{X_a} η_α, η_β⟩`` as ``[a, α, β]``.

        :rtype: NDArray[np.float64]
        """
        return np.einsum(
            "...ja,...jpq->...apq", self.coefficients, self.normal_conn
        )

    def shape_operator(self, alpha: int = 0) -> NDArray[np.float64]:
        r"""``S_α = g⁻¹ B_α`` in coordinates.

        :param alpha:
        :type alpha: int
        :rtype: NDArray[np.float64]
        """
        metric = np.einsum("...ai,...aj->...ij", self.dual, self.dual)
        return np.linalg.solve(metric, self.B[..., alpha, :, :])


def fundamental_data(f: ImmersionField) -> FundamentalData:
    r"""Frames by QR of ``df`` and of ``df`` extended by the normal hints,
    sign-aligned along a row-major sweep; then ``B`` and ``∇⊥``.

    :param f:
    :type f: ImmersionField
    :rtype: FundamentalData
    """
    chart = f.chart
    n = chart.dim
    jacobian = f.differential()
    tangent, dual = _orthonormal_columns(jacobian)
    coefficients = np.linalg.inv(dual)
    extended, triangle = _orthonormal_columns(
        np.concatenate([jacobian, f.hints()], axis=-1)
    )
    pivots = np.abs(np.diagonal(triangle, axis1=-2, axis2=-1))[..., n:]
    if pivots.min() <= RANK_FLOOR:
        raise GeometryError(
            "normal hints are tangent to the immersion",
            _node(np.argmin(pivots.min(axis=-1)), chart.resolution),
        )
    normal = np.ascontiguousarray(extended[..., n:])
    _align_signs(normal, n)
    _check_continuity(normal, chart, "normal")
    B = np.einsum("...ap,...aij->...pij", normal, f.hessian())
    B = 0.5 * (B + np.swapaxes(B, -1, -2))
    # dnormal[..., j, x, α] = ∂_j η_α^x
    dnormal = gradient(normal, chart, 2)
    conn = np.einsum("...jxp,...xq->...jpq", dnormal, normal)
    conn = 0.5 * (conn - np.swapaxes(conn, -1, -2))
    logger.debug("fundamental data on %s nodes", chart.resolution)
    return FundamentalData(chart, tangent, coefficients, dual, normal, B, conn)


def mean_curvature(fd: FundamentalData) -> NDArray[np.float64]:
    r"""``½ tr S_α`` per normal, shaped ``(*nodes, k)``.

    :param fd:
    :type fd: FundamentalData
    :rtype: NDArray[np.float64]
    """
    return 0.5 * np.einsum("...paa->...p", fd.B_frame)


def gauss_curvature(fd: FundamentalData) -> NDArray[np.float64]:
    r"""Extrinsic Gauss curvature ``Σ_α det S_α`` of a surface.

    :param fd:
    :type fd: FundamentalData
    :rtype: NDArray[np.float64]
    """
    if fd.chart.dim != 2:
        raise ShapeMismatchError("gauss_curvature needs a surface")
    b = fd.B_frame
    return np.sum(
        b[..., 0, 0] * b[..., 1, 1] - b[..., 0, 1] * b[..., 1, 0], axis=-1
    )


def frame_riemann(
    curvature: Curvature, fd: FundamentalData
) -> NDArray[np.float64]:
    r"""``R(X_a, X_b, X_c, X_d)``.

    :param curvature:
    :type curvature: Curvature
    :param fd:
    :type fd: FundamentalData
    :rtype: NDArray[np.float64]
    """
    c = fd.coefficients
    return np.einsum(
        "...ia,...jb,...kc,...ld,...ijkl->...abcd",
        c,
        c,
        c,
        c,
        curvature.riemann,
        optimize=True,
    )


@dataclass(frozen=True, eq=False)
class Residuals:
    r"""Residual fields with their sup and ``L²`` aggregates."""

    fields: dict[str, NDArray[np.float64]] = field(repr=False)
    sup: dict[str, float]
    l2: dict[str, float]

    @classmethod
    def collect(
        cls, chart: Chart, **fields: NDArray[np.float64]
    ) -> "Residuals":
        r"""Aggregate fields over interior nodes.

        :param chart:
        :type chart: Chart
        :param fields:
        :type fields: NDArray[np.float64]
        :rtype: "Residuals"
        """
        sup = {}
        l2 = {}
        for name, values in fields.items():
            sup[name], l2[name] = _aggregate(values, chart)
        return cls(fields, sup, l2)


def _gauss_pairing(fd: FundamentalData) -> NDArray[np.float64]:
    r"""``⟨B(X_a, X_d), B(X_b, X_c)⟩ − ⟨B(X_b, X_d), B(X_a, X_c)⟩``."""
    b = fd.B_frame
    first = np.einsum("...pad,...pbc->...abcd", b, b)
    return first - np.einsum("...abcd->...bacd", first)


def _codazzi_rhs(fd: FundamentalData) -> NDArray[np.float64]:
    r"""Right side of ``X_a B(X_b, X_c) − X_b B(X_a, X_c)``, ``[α,a,b,c]``."""
    b = fd.B_frame
    bracket_term = np.einsum("...abe,...pec->...pabc", fd.bracket, b)
    # B(X_a, ∇_{X_b} X_c, α)
    nabla = np.einsum("...bce,...pae->...pabc", fd.connection, b)
    # Σ_β B(X_b, X_c, β) N[a, α, β]
    normal = np.einsum("...rbc,...apr->...pabc", b, fd.N_frame)
    return (
        bracket_term
        - nabla
        + np.einsum("...pabc->...pbac", nabla)
        - np.einsum("...pabc->...pbac", normal)
        + normal
    )


def _ricci_quadratic(fd: FundamentalData) -> NDArray[np.float64]:
    r"""Terms of the Ricci equation besides ``N_{[X_a, X_b]}``,
    ``[a, b, α, β]``."""
    N = fd.N_frame
    b = fd.B_frame
    nn = np.einsum("...apr,...bqr->...abpq", N, N)
    bb = np.einsum("...pae,...qeb->...abpq", b, b)
    return (
        -nn
        + np.einsum("...abpq->...bapq", nn)
        - bb
        + np.einsum("...abpq->...abqp", bb)
    )


def gcr_residuals(
    chart: Chart, fd: FundamentalData, curvature: Curvature | None = None
) -> Residuals:
    r"""Gauss, Codazzi and Ricci residuals over all frame index choices.

    ``gauss[a, b, c, d]``, ``codazzi[α, a, b, c]`` and
    ``ricci[a, b, α, β]``; the Ricci residual is identically zero in
    codimension one.

    :param chart: carries the metric whose curvature enters Gauss
    :type chart: Chart
    :param fd:
    :type fd: FundamentalData
    :param curvature:
    :type curvature: Curvature | None
    :rtype: Residuals
    """
    curvature = curvature or riemann_curvature(chart)
    gauss = frame_riemann(curvature, fd) - _gauss_pairing(fd)
    xb = fd.frame_derivative(fd.B_frame)
    lhs = np.einsum("...apbc->...pabc", xb) - np.einsum(
        "...bpac->...pabc", xb
    )
    codazzi = lhs - _codazzi_rhs(fd)
    if fd.codim == 1:
        ricci = np.zeros((*chart.resolution, chart.dim, chart.dim, 1, 1))
    else:
        N = fd.N_frame
        xn = fd.frame_derivative(N)
        lhs = xn - np.einsum("...abpq->...bapq", xn)
        bracket_term = np.einsum("...abe,...epq->...abpq", fd.bracket, N)
        ricci = lhs - bracket_term - _ricci_quadratic(fd)
    residuals = Residuals.collect(
        chart, gauss=gauss, codazzi=codazzi, ricci=ricci
    )
    logger.info("gcr residual sup: %s", residuals.sup)
    return residuals


@dataclass(frozen=True, eq=False)
class VOmegaFields:
    r"""Antisymmetric vector-valued 2-tensors and 1-forms per frame index.

    ``VB[z, α, a, b, e]`` is the ``X_e`` component of
    ``V^B_{X_z, η_α}(X_a, X_b) = B(X_a, X_z, η_α) X_b − B(X_b, X_z, η_α) X_a``
    and ``OmegaB[z, α, a] = −B(X_a, X_z, η_α)``. ``VN[ξ, η, a, b, e]``
    and ``OmegaN[ξ, η, a]`` do the same with
    ``⟨∇⊥_{X_b} η_ξ, η_η⟩ X_a − ⟨∇⊥_{X_a} η_ξ, η_η⟩ X_b``.
    """

    VB: NDArray[np.float64] = field(repr=False)
    OmegaB: NDArray[np.float64] = field(repr=False)
    VN: NDArray[np.float64] = field(repr=False)
    OmegaN: NDArray[np.float64] = field(repr=False)


def build_v_omega(fd: FundamentalData) -> VOmegaFields:
    r"""Build v omega.

    :param fd:
    :type fd: FundamentalData
    :rtype: VOmegaFields
    """
    eye = np.eye(fd.chart.dim)
    b = fd.B_frame
    N = fd.N_frame
    first = np.einsum("...paz,be->...zpabe", b, eye)
    VB = first - np.einsum("...zpabe->...zpbae", first)
    OmegaB = -np.einsum("...paz->...zpa", b)
    first = np.einsum("...bxy,ae->...xyabe", N, eye)
    VN = first - np.einsum("...xyabe->...xybae", first)
    OmegaN = np.einsum("...axy->...xya", N)
    return VOmegaFields(VB, OmegaB, VN, OmegaN)


def _flat(values: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    r"""Fold the axes between the nodes and the last one."""
    return values.reshape(*values.shape[:n], -1, values.shape[-1])


def exterior_derivative_1form(
    fd: FundamentalData, omega: NDArray[np.float64]
) -> NDArray[np.float64]:
    r"""``dΩ(X_a, X_b) = X_a Ω(X_b) − X_b Ω(X_a) − Ω([X_a, X_b])``.

    The frame index of ``Ω`` is its last axis; the result has two.

    :param fd:
    :type fd: FundamentalData
    :param omega:
    :type omega: NDArray[np.float64]
    :rtype: NDArray[np.float64]
    """
    n = fd.chart.dim
    # x[..., a, b] = X_a Ω(X_b)
    x = np.moveaxis(fd.frame_derivative(omega), n, -2)
    along_bracket = np.einsum(
        "...abe,...re->...rab", fd.bracket, _flat(omega, n)
    ).reshape(x.shape)
    return x - np.swapaxes(x, -1, -2) - along_bracket


def _intrinsic_divergence(
    fd: FundamentalData, components: NDArray[np.float64]
) -> NDArray[np.float64]:
    r"""``(1/√g) ∂_i (√g V^i)`` for frame components on the last axis."""
    n = fd.chart.dim
    coordinate = np.einsum(
        "...ie,...re->...ri", fd.coefficients, _flat(components, n)
    ).reshape(components.shape)
    sqrt_g = 1 / np.abs(np.linalg.det(fd.coefficients))
    sqrt_g = sqrt_g.reshape(sqrt_g.shape + (1,) * (components.ndim - n))
    weighted = coordinate * sqrt_g
    total = sum(partial(weighted[..., i], fd.chart, i, 2) for i in range(n))
    return total / sqrt_g[..., 0]


@dataclass(frozen=True)
class IdentityCheck:
    r"""Residuals of ``div V = dΩ + linear terms`` for both families, and
    the agreement of the two ways of computing ``div V``."""

    b_residual: float
    n_residual: float
    expansion_agreement: float


def divcurl_identity_check(
    vo: VOmegaFields, fd: FundamentalData
) -> IdentityCheck:
    r"""Compare ``div V`` with ``dΩ`` plus its linear terms.

    For the ``B`` family
    ``div V = dΩ − B([X, Y], Z, η) + B(X, Z, η) div Y − B(Y, Z, η) div X``;
    for the ``∇⊥`` family
    ``div V = dΩ + N_{[X, Y]} + N_Y div X − N_X div Y``. ``div V`` is taken
    from ``(1/√g) ∂_i (√g V^i)`` and, separately, from the product rule
    expansion ``div(φY) = Y φ + φ div Y``.

    :param vo:
    :type vo: VOmegaFields
    :param fd:
    :type fd: FundamentalData
    :rtype: IdentityCheck
    """
    chart = fd.chart
    b = fd.B_frame
    N = fd.N_frame
    div = fd.divergence
    L = fd.bracket
    div_vb = _intrinsic_divergence(fd, vo.VB)
    d_omega_b = exterior_derivative_1form(fd, vo.OmegaB)
    # [z, α, a, b]
    linear_b = (
        -np.einsum("...abe,...pez->...zpab", L, b)
        + np.einsum("...paz,...b->...zpab", b, div)
        - np.einsum("...pbz,...a->...zpab", b, div)
    )
    b_residual = div_vb - d_omega_b - linear_b
    div_vn = _intrinsic_divergence(fd, vo.VN)
    d_omega_n = exterior_derivative_1form(fd, vo.OmegaN)
    linear_n = (
        np.einsum("...abe,...exy->...xyab", L, N)
        + np.einsum("...bxy,...a->...xyab", N, div)
        - np.einsum("...axy,...b->...xyab", N, div)
    )
    n_residual = div_vn - d_omega_n - linear_n
    # product rule: Y φ + φ div Y − X ψ − ψ div X with φ = B(X, Z)
    xb = fd.frame_derivative(b)
    expansion = (
        np.einsum("...bpaz->...zpab", xb)
        + np.einsum("...paz,...b->...zpab", b, div)
        - np.einsum("...apbz->...zpab", xb)
        - np.einsum("...pbz,...a->...zpab", b, div)
    )
    scale = max(
        _aggregate(div_vb, chart)[0], _aggregate(expansion, chart)[0]
    )
    difference = _aggregate(div_vb - expansion, chart)[0]
    return IdentityCheck(
        _aggregate(b_residual, chart)[0],
        _aggregate(n_residual, chart)[0],
        difference / scale if scale > 0 else 0.0,
    )


def reformulated_gcr_residuals(
    vo: VOmegaFields, fd: FundamentalData, curvature: Curvature
) -> Residuals:
    r"""Residuals of the div-curl form of the Gauss, Codazzi and Ricci
    equations, built from the ``V`` and ``Ω`` fields alone.

    - Gauss: ``R(X, Y, Z, W) − Σ_η ⟨V^B_{Z, η}(X, Y), Ω^B_{W, η}⟩``
    - Codazzi: ``dΩ^B_{Z, η}(X, Y) + Σ_β ⟨V^⊥_{η, β}(X, Y), Ω^B_{Z, β}⟩
      + B(Y, ∇_X Z, η) − B(X, ∇_Y Z, η)``
    - Ricci: ``dΩ^⊥_{ξ, η}(X, Y) + Σ_β ⟨V^⊥_{η, β}(X, Y), Ω^⊥_{ξ, β}⟩
      − Σ_Z ⟨V^B_{Z, ξ}(X, Y), Ω^B_{Z, η}⟩``

    The Codazzi residual is the negative of the direct one and the Ricci
    residual equals it. Layouts follow :func:`gcr_residuals`.

    :param vo:
    :type vo: VOmegaFields
    :param fd:
    :type fd: FundamentalData
    :param curvature:
    :type curvature: Curvature
    :rtype: Residuals
    """
    chart = fd.chart
    pairing = np.einsum("...zpabe,...wpe->...abzw", vo.VB, vo.OmegaB)
    gauss = frame_riemann(curvature, fd) - pairing
    d_omega_b = exterior_derivative_1form(fd, vo.OmegaB)
    normal_pairing = np.einsum("...qrabe,...zre->...zqab", vo.VN, vo.OmegaB)
    # B(X_b, ∇_{X_a} X_z, η) = −Γf[a, z, e] Ω^B[e, η, b]
    nabla = -np.einsum("...aze,...epb->...zpab", fd.connection, vo.OmegaB)
    codazzi = np.einsum(
        "...zpab->...pabz",
        d_omega_b + normal_pairing + nabla - np.swapaxes(nabla, -1, -2),
    )
    if fd.codim == 1:
        ricci = np.zeros((*chart.resolution, chart.dim, chart.dim, 1, 1))
    else:
        d_omega_n = exterior_derivative_1form(fd, vo.OmegaN)
        normal_pairing = np.einsum(
            "...qrabe,...pre->...pqab", vo.VN, vo.OmegaN
        )
        tangent_pairing = np.einsum(
            "...zpabe,...zqe->...pqab", vo.VB, vo.OmegaB
        )
        ricci = np.einsum(
            "...pqab->...abpq", d_omega_n + normal_pairing - tangent_pairing
        )
    return Residuals.collect(chart, gauss=gauss, codazzi=codazzi, ricci=ricci)
