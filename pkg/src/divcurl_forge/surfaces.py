r"""Surfaces
============

Closed-form charts and immersions with known curvature, selected by name.
"""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .immersion_geometry import Chart, ImmersionField


@dataclass(frozen=True, eq=False)
class GoldenSurface:
    r"""A chart, its immersion when there is one, and the exact Gauss
    curvature at every node."""

    name: str
    chart: Chart
    immersion: ImmersionField | None
    gauss_curvature: NDArray[np.float64] = field(repr=False)


def _diagonal(*entries: NDArray[np.float64]) -> NDArray[np.float64]:
    shape = np.broadcast_shapes(*(np.shape(e) for e in entries))
    metric = np.zeros((*shape, len(entries), len(entries)))
    for i, entry in enumerate(entries):
        metric[..., i, i] = entry
    return metric


def _stack(*columns: NDArray[np.float64]) -> NDArray[np.float64]:
    shape = np.broadcast_shapes(*(np.shape(c) for c in columns))
    return np.stack([np.broadcast_to(c, shape) for c in columns], axis=-1)


def _immersion(
    chart: Chart,
    f: NDArray[np.float64],
    jacobian: NDArray[np.float64],
    hint: NDArray[np.float64] | None,
    analytic: bool,
) -> ImmersionField:
    return ImmersionField(chart, f, jacobian if analytic else None, hint)


def plane(resolution: int = 64, analytic: bool = False) -> GoldenSurface:
    r"""``(x, y, 0)`` on the unit square.

    :param resolution:
    :type resolution: int
    :param analytic:
    :type analytic: bool
    :rtype: GoldenSurface
    """
    chart = Chart(2, 1, (0.0, 0.0), (1.0, 1.0), (resolution, resolution))
    x, y = chart.coordinates()
    zero = np.zeros_like(x)
    one = np.ones_like(x)
    f = _stack(x, y, zero)
    jacobian = np.stack([_stack(one, zero, zero), _stack(zero, one, zero)], -1)
    return GoldenSurface(
        "plane", chart, _immersion(chart, f, jacobian, None, analytic), zero
    )


def cylinder(
    resolution: int = 64, radius: float = 1.0, analytic: bool = False
) -> GoldenSurface:
    r"""``(r cos(x/r), r sin(x/r), y)``, outward normal.

    :param resolution:
    :type resolution: int
    :param radius:
    :type radius: float
    :param analytic:
    :type analytic: bool
    :rtype: GoldenSurface
    """
    chart = Chart(2, 1, (0.0, 0.0), (1.0, 1.0), (resolution, resolution))
    x, y = chart.coordinates()
    cos, sin = np.cos(x / radius), np.sin(x / radius)
    zero = np.zeros_like(x)
    f = _stack(radius * cos, radius * sin, y)
    jacobian = np.stack(
        [_stack(-sin, cos, zero), _stack(zero, zero, np.ones_like(x))], -1
    )
    hint = _stack(cos, sin, zero)[..., None]
    return GoldenSurface(
        "cylinder", chart, _immersion(chart, f, jacobian, hint, analytic), zero
    )


def sphere(
    resolution: int = 64, radius: float = 1.0, analytic: bool = False
) -> GoldenSurface:
    r"""Polar angles ``θ ∈ [π/4, 3π/4]`` and periodic ``φ``; outward
    normal.

    :param resolution:
    :type resolution: int
    :param radius:
    :type radius: float
    :param analytic:
    :type analytic: bool
    :rtype: GoldenSurface
    """
    lower, upper = (np.pi / 4, 0.0), (3 * np.pi / 4, 2 * np.pi)
    theta, phi = np.meshgrid(
        np.linspace(lower[0], upper[0], resolution),
        np.linspace(0.0, 2 * np.pi, resolution, endpoint=False),
        indexing="ij",
    )
    metric = _diagonal(
        np.full_like(theta, radius**2), (radius * np.sin(theta)) ** 2
    )
    chart = Chart(
        2, 1, lower, upper, (resolution, resolution), frozenset({1}), metric
    )
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    radial = _stack(st * cp, st * sp, ct)
    jacobian = radius * np.stack(
        [_stack(ct * cp, ct * sp, -st), _stack(-st * sp, st * cp, 0 * st)],
        -1,
    )
    immersion = _immersion(
        chart, radius * radial, jacobian, radial[..., None], analytic
    )
    return GoldenSurface(
        "sphere", chart, immersion, np.full_like(theta, radius**-2)
    )


def helicoid(
    resolution: int = 64, pitch: float = 0.5, analytic: bool = False
) -> GoldenSurface:
    r"""``(u cos v, u sin v, c v)`` for ``u ∈ [−1, 1]``, ``v ∈ [0, π]``.

    :param resolution:
    :type resolution: int
    :param pitch:
    :type pitch: float
    :param analytic:
    :type analytic: bool
    :rtype: GoldenSurface
    """
    lower, upper = (-1.0, 0.0), (1.0, np.pi)
    u, v = np.meshgrid(
        np.linspace(lower[0], upper[0], resolution),
        np.linspace(lower[1], upper[1], resolution),
        indexing="ij",
    )
    width = u**2 + pitch**2
    chart = Chart(
        2,
        1,
        lower,
        upper,
        (resolution, resolution),
        metric=_diagonal(np.ones_like(u), width),
    )
    cos, sin = np.cos(v), np.sin(v)
    f = _stack(u * cos, u * sin, pitch * v)
    jacobian = np.stack(
        [_stack(cos, sin, 0 * u), _stack(-u * sin, u * cos, pitch + 0 * u)],
        -1,
    )
    hint = _stack(pitch * sin, -pitch * cos, u)[..., None]
    return GoldenSurface(
        "helicoid",
        chart,
        _immersion(chart, f, jacobian, hint, analytic),
        -(pitch**2) / width**2,
    )


def conformal(
    resolution: int = 64, amplitude: float = 0.1, analytic: bool = False
) -> GoldenSurface:
    r"""``e^{2λ}(dx² + dy²)`` with ``λ = a sin(2πx)`` on the flat torus.

    Only the metric is given; its curvature is ``−Δλ e^{−2λ}``.

    :param resolution:
    :type resolution: int
    :param amplitude:
    :type amplitude: float
    :param analytic: unused
    :type analytic: bool
    :rtype: GoldenSurface
    """
    axis = np.linspace(0.0, 1.0, resolution, endpoint=False)
    x, _ = np.meshgrid(axis, axis, indexing="ij")
    lam = amplitude * np.sin(2 * np.pi * x)
    factor = np.exp(2 * lam)
    chart = Chart(
        2,
        1,
        (0.0, 0.0),
        (1.0, 1.0),
        (resolution, resolution),
        frozenset({0, 1}),
        _diagonal(factor, factor),
    )
    laplacian = -amplitude * (2 * np.pi) ** 2 * np.sin(2 * np.pi * x)
    return GoldenSurface("conformal", chart, None, -laplacian / factor)


def torus(
    resolution: int = 64, radius: float = 1.0, analytic: bool = False
) -> GoldenSurface:
    r"""A patch of the flat torus ``S¹(r) × S¹(r) ⊂ ℝ⁴``.

    :param resolution:
    :type resolution: int
    :param radius:
    :type radius: float
    :param analytic:
    :type analytic: bool
    :rtype: GoldenSurface
    """
    bound = 0.8 * radius
    chart = Chart(
        2, 2, (-bound, -bound), (bound, bound), (resolution, resolution)
    )
    x, y = chart.coordinates()
    cx, sx = np.cos(x / radius), np.sin(x / radius)
    cy, sy = np.cos(y / radius), np.sin(y / radius)
    zero = np.zeros_like(x)
    f = radius * _stack(cx, sx, cy, sy)
    jacobian = np.stack(
        [_stack(-sx, cx, zero, zero), _stack(zero, zero, -sy, cy)], -1
    )
    hint = np.eye(4)[:, [0, 2]]
    return GoldenSurface(
        "torus", chart, _immersion(chart, f, jacobian, hint, analytic), zero
    )


SURFACES: dict[str, tuple[Callable[..., GoldenSurface], str]] = {
    "conformal": (conformal, "conformally flat metric, no immersion"),
    "cylinder": (cylinder, "round cylinder in R^3"),
    "helicoid": (helicoid, "helicoid in R^3, negative curvature"),
    "plane": (plane, "flat plane in R^3"),
    "sphere": (sphere, "spherical band in R^3"),
    "torus": (torus, "flat torus patch in R^4, codimension 2"),
}


def golden_surface(name: str, resolution: int = 64, **params) -> GoldenSurface:
    r"""Golden surface.

    :param name:
    :type name: str
    :param resolution:
    :type resolution: int
    :param params: radius, pitch, amplitude or analytic
    :rtype: GoldenSurface
    """
    if name not in SURFACES:
        raise KeyError(f"unknown surface {name!r}")
    return SURFACES[name][0](resolution, **params)
