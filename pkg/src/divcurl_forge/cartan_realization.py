r"""Cartan realization
=====================

Moving frames and the reconstruction of an immersion from its fundamental
data. A frame field ``A`` stores the frame vectors as rows: tangent
vectors first, normals after. With

``W_ab(∂_k) = ⟨∂_k e_a, e_b⟩`` and ``w_a(∂_k) = ⟨∂_k f, e_a⟩``

the frame satisfies ``dA = W·A`` (equivalently ``W = dA·Aᵀ`` since
``AAᵀ = I``) and the position ``df = w·A``. Differentiating these gives
the structural equations ``dw = w∧W`` and ``dW = W∧W``; for ``−W`` the
second reads ``d(−W) + (−W)∧(−W) = 0``.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .errors import GeometryError, ShapeMismatchError
from .immersion_geometry import (
    Chart,
    FundamentalData,
    ImmersionField,
    Residuals,
    christoffel_symbols,
    partial,
)

logger = logging.getLogger(__name__)

Tree = Literal["row_major", "column_major"]
ORTHONORMAL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FramePack:
    r"""Coframe ``w[..., k, a]`` and connection ``W[..., k, a, b]`` per
    node and coordinate direction ``k``."""

    chart: Chart
    w: NDArray[np.float64] = field(repr=False)
    W: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        r"""Check shapes, padding and antisymmetry.

        :rtype: None
        """
        chart = self.chart
        size = chart.ambient_dim
        w = np.asarray(self.w, dtype=np.float64)
        W = np.asarray(self.W, dtype=np.float64)
        if w.shape != (*chart.resolution, chart.dim, size):
            raise ShapeMismatchError(f"w has shape {w.shape}")
        if W.shape != (*chart.resolution, chart.dim, size, size):
            raise ShapeMismatchError(f"W has shape {W.shape}")
        if np.any(w[..., chart.dim :] != 0):
            raise GeometryError("normal entries of w must vanish")
        if np.abs(W + np.swapaxes(W, -1, -2)).max() > 1e-12:
            raise GeometryError("W is not antisymmetric")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "W", W)


def connection_forms(chart: Chart, fd: FundamentalData) -> FramePack:
    r"""Coframe and ``𝔰𝔬(n+k)``-valued connection of a frame.

    The tangential block is ``⟨∇_{∂_k} X_a, X_b⟩`` from the Christoffel
    symbols of the chart metric, the mixed block ``B(∂_k, X_a, η_α)`` and
    the normal block the normal connection.

    :param chart: carries the metric the frames must be orthonormal for
    :type chart: Chart
    :param fd:
    :type fd: FundamentalData
    :rtype: FramePack
    """
    n = chart.dim
    k = fd.codim
    metric = np.einsum("...ai,...aj->...ij", fd.dual, fd.dual)
    defect = np.abs(metric - chart.metric)[chart.interior()].max()
    if defect > ORTHONORMAL_TOL * max(np.abs(chart.metric).max(), 1.0):
        raise GeometryError(
            f"frame is not orthonormal for the metric ({defect:.3e})"
        )
    c = fd.coefficients
    w = np.zeros((*chart.resolution, n, n + k))
    w[..., :n] = np.swapaxes(fd.dual, -1, -2)
    gamma = christoffel_symbols(chart)
    # dc[..., k, m, a] = ∂_k c[m, a]
    dc = np.moveaxis(
        np.stack([partial(c, chart, axis, 4) for axis in range(n)]), 0, n
    )
    covariant = dc + np.einsum("...mki,...ia->...kma", gamma, c)
    tangential = np.einsum("...kma,...bm->...kab", covariant, fd.dual)
    W = np.zeros((*chart.resolution, n, n + k, n + k))
    W[..., :n, :n] = 0.5 * (tangential - np.swapaxes(tangential, -1, -2))
    mixed = np.einsum("...ma,...pmk->...kap", c, fd.B)
    W[..., :n, n:] = mixed
    W[..., n:, :n] = -np.swapaxes(mixed, -1, -2)
    W[..., n:, n:] = fd.normal_conn
    return FramePack(chart, w, W)


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def exterior_derivative_forms(
    chart: Chart, form: NDArray[np.float64]
) -> NDArray[np.float64]:
    r"""``dα(∂_i, ∂_j) = ∂_i α_j − ∂_j α_i`` for ``i < j``, stacked on a new
    axis after the nodes.

    :param chart:
    :type chart: Chart
    :param form: component index right after the node axes
    :type form: NDArray[np.float64]
    :rtype: NDArray[np.float64]
    """
    n = chart.dim
    return np.stack(
        [
            partial(np.take(form, j, axis=n), chart, i, 2)
            - partial(np.take(form, i, axis=n), chart, j, 2)
            for i, j in _pairs(n)
        ],
        axis=n,
    )


def structural_residuals(fp: FramePack) -> Residuals:
    r"""Residuals of ``dw = w∧W`` (``first``) and ``dW = W∧W``
    (``second``) on every coordinate plane.

    :param fp:
    :type fp: FramePack
    :rtype: Residuals
    """
    chart = fp.chart
    n = chart.dim
    pairs = _pairs(n)
    w, W = fp.w, fp.W
    first = exterior_derivative_forms(chart, w) - np.stack(
        [
            np.einsum("...a,...ab->...b", w[..., i, :], W[..., j, :, :])
            - np.einsum("...a,...ab->...b", w[..., j, :], W[..., i, :, :])
            for i, j in pairs
        ],
        axis=n,
    )
    second = exterior_derivative_forms(chart, W) - np.stack(
        [
            W[..., i, :, :] @ W[..., j, :, :]
            - W[..., j, :, :] @ W[..., i, :, :]
            for i, j in pairs
        ],
        axis=n,
    )
    residuals = Residuals.collect(chart, first=first, second=second)
    logger.info("structural residual sup: %s", residuals.sup)
    return residuals


def inject_curvature_defect(fp: FramePack, rho: float) -> FramePack:
    r"""Add ``ρ x₀`` times a fixed tangent-normal rotation generator ``G``
    to the ``∂₁`` component of ``W``. The second structural residual on
    the ``(∂₀, ∂₁)`` plane picks up ``ρ G + ρ x₀ [W₀, G]``.

    :param fp:
    :type fp: FramePack
    :param rho:
    :type rho: float
    :rtype: FramePack
    """
    chart = fp.chart
    size = chart.ambient_dim
    generator = np.zeros((size, size))
    generator[0, size - 1] = 1.0
    generator[size - 1, 0] = -1.0
    x0 = chart.coordinates()[0] - chart.lower[0]
    W = fp.W.copy()
    W[..., 1, :, :] += rho * x0[..., None, None] * generator
    return FramePack(chart, fp.w, W)


@dataclass(frozen=True, eq=False)
class FrameIntegral:
    r"""Integrated frame ``A`` and position ``f`` with their loop defects.

    ``holonomy_defect`` is the largest mismatch between ``A`` transported
    across a grid edge and the value the spanning tree gave the far end;
    ``closedness_defect`` does the same for ``f``.
    """

    chart: Chart
    A: NDArray[np.float64] | None = field(repr=False)
    f: NDArray[np.float64] | None = field(default=None, repr=False)
    holonomy_defect: float = 0.0
    closedness_defect: float = 0.0
    base: tuple[int, ...] = (0, 0)
    tree: Tree = "row_major"


def _midpoints(
    values: NDArray[np.float64], chart: Chart, axis: int
) -> NDArray[np.float64]:
    r"""Values halfway between node ``i`` and ``i + 1`` along ``axis``.

    Cubic interpolation inside, quadratic next to non-periodic ends.
    """

    def shift(s: int) -> NDArray[np.float64]:
        return np.roll(values, -s, axis)

    mid = (9 * (values + shift(1)) - shift(-1) - shift(2)) / 16
    if axis in chart.periodic_axes:
        return mid
    v = np.moveaxis(values, axis, 0)
    out = np.moveaxis(mid, axis, 0).copy()
    out[0] = (3 * v[0] + 6 * v[1] - v[2]) / 8
    out[-2] = (-v[-3] + 6 * v[-2] + 3 * v[-1]) / 8
    out[-1] = v[-1]
    return np.moveaxis(out, 0, axis)


def _polar(A: NDArray[np.float64]) -> NDArray[np.float64]:
    u, _, vt = np.linalg.svd(A)
    return u @ vt


def _rk4(
    A: NDArray[np.float64],
    W0: NDArray[np.float64],
    Wm: NDArray[np.float64],
    W1: NDArray[np.float64],
    step: float,
) -> NDArray[np.float64]:
    r"""One step of ``dA/ds = W(s) A`` followed by polar projection."""
    k1 = W0 @ A
    k2 = Wm @ (A + 0.5 * step * k1)
    k3 = Wm @ (A + 0.5 * step * k2)
    k4 = W1 @ (A + step * k3)
    return _polar(A + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


def _simpson(
    f: NDArray[np.float64],
    v0: NDArray[np.float64],
    vm: NDArray[np.float64],
    v1: NDArray[np.float64],
    step: float,
) -> NDArray[np.float64]:
    return f + step / 6 * (v0 + 4 * vm + v1)


def _axis_order(dim: int, tree: Tree) -> list[int]:
    if tree == "row_major":
        return list(range(dim))
    if tree == "column_major":
        return list(range(dim))[::-1]
    raise ValueError(f"unknown spanning tree {tree!r}")


def _march(
    result: NDArray[np.float64],
    integrand: NDArray[np.float64],
    chart: Chart,
    base: tuple[int, ...],
    tree: Tree,
    step_fn,
) -> None:
    r"""Fill ``result`` from its base value along a comb spanning tree.

    ``integrand[axis]`` holds the node values along ``axis``; the comb
    first runs through the base along the first axis of the tree order,
    then every later axis is swept from the nodes already reached.
    """
    order = _axis_order(chart.dim, tree)
    for stage, axis in enumerate(order):
        free = set(order[:stage])
        h = chart.spacing[axis]
        mid = _midpoints(integrand[axis], chart, axis)

        def at(i: int, axis: int = axis, free: set = free) -> tuple:
            return tuple(
                slice(None) if j in free else (i if j == axis else base[j])
                for j in range(chart.dim)
            )

        n = chart.resolution[axis]
        values = integrand[axis]
        for i in range(base[axis], n - 1):
            result[at(i + 1)] = step_fn(
                result[at(i)], values[at(i)], mid[at(i)], values[at(i + 1)], h
            )
        for i in range(base[axis], 0, -1):
            result[at(i - 1)] = step_fn(
                result[at(i)],
                values[at(i)],
                mid[at(i - 1)],
                values[at(i - 1)],
                -h,
            )


def _edge_defect(
    result: NDArray[np.float64],
    integrand: NDArray[np.float64],
    chart: Chart,
    step_fn,
) -> float:
    r"""Largest mismatch of one step across every grid edge."""
    defect = 0.0
    for axis in range(chart.dim):
        values = integrand[axis]
        mid = _midpoints(values, chart, axis)
        h = chart.spacing[axis]
        ahead = np.roll(result, -1, axis)
        stepped = step_fn(result, values, mid, np.roll(values, -1, axis), h)
        mismatch = np.abs(stepped - ahead)
        if axis not in chart.periodic_axes:
            mismatch = np.take(
                mismatch, range(chart.resolution[axis] - 1), axis=axis
            )
        defect = max(defect, float(mismatch.max()))
    return defect


def _check_base(
    chart: Chart, base: tuple[int, ...] | None
) -> tuple[int, ...]:
    if base is None:
        return (0,) * chart.dim
    base = tuple(int(b) for b in base)
    if len(base) != chart.dim or not all(
        0 <= b < n for b, n in zip(base, chart.resolution, strict=True)
    ):
        raise ShapeMismatchError(f"base node {base} outside the chart")
    return base


def solve_pfaff(
    fp: FramePack,
    A0: NDArray[np.float64],
    base: tuple[int, ...] | None = None,
    tree: Tree = "row_major",
) -> FrameIntegral:
    r"""Integrate ``dA = W·A`` from ``A(base) = A0`` along a spanning tree.

    :param fp:
    :type fp: FramePack
    :param A0: orthogonal
    :type A0: NDArray[np.float64]
    :param base: the first node by default
    :type base: tuple[int, ...] | None
    :param tree:
    :type tree: Tree
    :rtype: FrameIntegral
    """
    chart = fp.chart
    size = chart.ambient_dim
    base = _check_base(chart, base)
    A0 = np.asarray(A0, dtype=np.float64)
    if A0.shape != (size, size):
        raise ShapeMismatchError(f"A0 must be {size}x{size}")
    if np.abs(A0.T @ A0 - np.eye(size)).max() > 1e-10:
        raise GeometryError("A0 is not orthogonal")
    if not np.all(np.isfinite(fp.W)):
        raise GeometryError("W is not finite")
    integrand = np.moveaxis(fp.W, chart.dim, 0)
    A = np.zeros((*chart.resolution, size, size))
    A[base] = A0
    _march(A, integrand, chart, base, tree, _rk4)
    holonomy = _edge_defect(A, integrand, chart, _rk4)
    logger.info("pfaff: holonomy defect %.3e (%s)", holonomy, tree)
    return FrameIntegral(chart, A, None, holonomy, 0.0, base, tree)


def solve_poincare(
    fp: FramePack,
    fi: FrameIntegral,
    f0: NDArray[np.float64] | None = None,
) -> FrameIntegral:
    r"""Integrate ``df = w·A`` by Simpson's rule along the tree of ``fi``.

    :param fp:
    :type fp: FramePack
    :param fi:
    :type fi: FrameIntegral
    :param f0: position of the base node, the origin by default
    :type f0: NDArray[np.float64] | None
    :rtype: FrameIntegral
    """
    if fi.A is None:
        raise ShapeMismatchError("the frame integral carries no frame field")
    chart = fp.chart
    size = chart.ambient_dim
    f0 = np.zeros(size) if f0 is None else np.asarray(f0, dtype=np.float64)
    if f0.shape != (size,):
        raise ShapeMismatchError(f"f0 must have {size} entries")
    # velocity[axis, ..., :] = w(∂_axis)·A
    velocity = np.moveaxis(
        np.einsum("...ka,...ab->...kb", fp.w, fi.A), chart.dim, 0
    )
    f = np.zeros((*chart.resolution, size))
    f[fi.base] = f0
    _march(f, velocity, chart, fi.base, fi.tree, _simpson)
    closedness = _edge_defect(f, velocity, chart, _simpson)
    logger.info("poincare: closedness defect %.3e", closedness)
    return replace(fi, f=f, closedness_defect=closedness)


def reconstruct(
    fp: FramePack,
    A0: NDArray[np.float64],
    f0: NDArray[np.float64] | None = None,
    base: tuple[int, ...] | None = None,
    tree: Tree = "row_major",
) -> FrameIntegral:
    r"""Frame and position in one go.

    :param fp:
    :type fp: FramePack
    :param A0:
    :type A0: NDArray[np.float64]
    :param f0:
    :type f0: NDArray[np.float64] | None
    :param base:
    :type base: tuple[int, ...] | None
    :param tree:
    :type tree: Tree
    :rtype: FrameIntegral
    """
    return solve_poincare(fp, solve_pfaff(fp, A0, base, tree), f0)


def frame_matrix(fd: FundamentalData) -> NDArray[np.float64]:
    r"""Rows ``X_1, …, X_n, η_1, …, η_k`` per node.

    :param fd:
    :type fd: FundamentalData
    :rtype: NDArray[np.float64]
    """
    frame = np.concatenate([fd.tangent, fd.normal], axis=-1)
    return np.swapaxes(frame, -1, -2)


def pfaff_defining_residual(fp: FramePack, fi: FrameIntegral) -> float:
    r"""Sup of ``‖∂_k A·Aᵀ − W(∂_k)‖`` over interior nodes.

    :param fp:
    :type fp: FramePack
    :param fi:
    :type fi: FrameIntegral
    :rtype: float
    """
    if fi.A is None:
        raise ShapeMismatchError("the frame integral carries no frame field")
    chart = fp.chart
    residual = 0.0
    for axis in range(chart.dim):
        dA = partial(fi.A, chart, axis, 2)
        defect = dA @ np.swapaxes(fi.A, -1, -2) - fp.W[..., axis, :, :]
        residual = max(
            residual, float(np.abs(defect[chart.interior()]).max())
        )
    return residual


def orthogonality_drift(fi: FrameIntegral) -> float:
    r"""Largest ``|AᵀA − I|`` entry.

    :param fi:
    :type fi: FrameIntegral
    :rtype: float
    """
    size = fi.A.shape[-1]
    gram = np.swapaxes(fi.A, -1, -2) @ fi.A
    return float(np.abs(gram - np.eye(size)).max())


@dataclass(frozen=True)
class Alignment:
    r"""``f2 ≈ rotation·f1 + translation``."""

    rotation: NDArray[np.float64] = field(repr=False)
    translation: NDArray[np.float64] = field(repr=False)
    rms: float
    reflection: bool


def volume_weights(chart: Chart) -> NDArray[np.float64]:
    r"""Trapezoid weights per node.

    :param chart:
    :type chart: Chart
    :rtype: NDArray[np.float64]
    """
    weights = np.full(chart.resolution, chart.cell_volume)
    for axis, n in enumerate(chart.resolution):
        if axis in chart.periodic_axes:
            continue
        scale = np.ones(n)
        scale[[0, -1]] = 0.5
        shape = [1] * chart.dim
        shape[axis] = n
        weights = weights * scale.reshape(shape)
    return weights


def rigid_motion_align(
    f1: ImmersionField | NDArray[np.float64],
    f2: ImmersionField | NDArray[np.float64],
    chart: Chart | None = None,
) -> Alignment:
    r"""Weighted orthogonal Procrustes fit of ``f2`` by a rigid motion of
    ``f1``; reflections are allowed and flagged.

    :param f1:
    :type f1: ImmersionField | NDArray[np.float64]
    :param f2:
    :type f2: ImmersionField | NDArray[np.float64]
    :param chart: needed when plain arrays are passed
    :type chart: Chart | None
    :rtype: Alignment
    """
    if isinstance(f1, ImmersionField):
        chart = f1.chart
        f1 = f1.f
    if isinstance(f2, ImmersionField):
        chart = chart or f2.chart
        f2 = f2.f
    if chart is None:
        raise ShapeMismatchError("a chart is needed to weight the nodes")
    if np.shape(f1) != np.shape(f2):
        raise ShapeMismatchError("point clouds differ in shape")
    size = np.shape(f1)[-1]
    weights = volume_weights(chart).ravel()
    weights = weights / weights.sum()
    p = np.reshape(f1, (-1, size))
    q = np.reshape(f2, (-1, size))
    p_mean = weights @ p
    q_mean = weights @ q
    p_centred = p - p_mean
    q_centred = q - q_mean
    spread = np.linalg.svd(
        np.sqrt(weights)[:, None] * p_centred, compute_uv=False
    )
    if np.count_nonzero(spread > 1e-10 * spread.max()) < chart.dim:
        raise GeometryError("point cloud is degenerate")
    u, _, vt = np.linalg.svd((weights[:, None] * q_centred).T @ p_centred)
    rotation = u @ vt
    translation = q_mean - rotation @ p_mean
    residual = p @ rotation.T + translation - q
    rms = float(np.sqrt(weights @ np.sum(residual**2, axis=1)))
    return Alignment(
        rotation, translation, rms, bool(np.linalg.det(rotation) < 0)
    )
