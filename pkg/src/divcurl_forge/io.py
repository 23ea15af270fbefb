r"""IO
======

Two little-endian binary containers, each with a JSON sidecar of the same
stem for human inspection.

``DCCH`` holds one cochain: the magic, a ``u16`` version, ``u8`` dimension,
``u8`` degree (high bit set for dual cochains), one ``u32`` cell count per
axis, then the ``f64`` values in block order. The sidecar repeats the
header and adds the periods, which the binary header does not carry.

``GEOM`` holds named ``f64`` arrays: the magic, a ``u16`` version and a
``u16`` array count, then the arrays back to back. Names, shapes and any
chart metadata live in the sidecar.
"""

import json
import os
import struct
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .cartan_realization import FrameIntegral
from .errors import ContainerError
from .grid_complex import Cochain, PeriodicGrid
from .immersion_geometry import Chart
from .utils import write_json

VERSION = 1
COCHAIN_MAGIC = b"DCCH"
GEOMETRY_MAGIC = b"GEOM"
DUAL_BIT = 0x80
F64 = np.dtype("<f8")


def sidecar_path(path: str | os.PathLike) -> Path:
    r"""Sidecar path.

    :param path:
    :type path: str | os.PathLike
    :rtype: Path
    """
    return Path(path).with_suffix(".json")


def _read_sidecar(path: str | os.PathLike) -> dict[str, Any]:
    sidecar = sidecar_path(path)
    if not sidecar.exists():
        return {}
    with open(sidecar) as f:
        return json.load(f)


def save_cochain(c: Cochain, path: str | os.PathLike) -> None:
    r"""Write a cochain and its sidecar.

    :param c:
    :type c: Cochain
    :param path:
    :type path: str | os.PathLike
    :rtype: None
    """
    grid = c.grid
    degree = c.degree | (DUAL_BIT if c.dual else 0)
    header = struct.pack(
        f"<4sHBB{grid.dim}I",
        COCHAIN_MAGIC,
        VERSION,
        grid.dim,
        degree,
        *grid.resolution,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(c.values.astype(F64).tobytes())
    write_json(
        sidecar_path(path),
        {
            "magic": COCHAIN_MAGIC.decode(),
            "version": VERSION,
            "dim": grid.dim,
            "degree": c.degree,
            "dual": c.dual,
            "resolution": list(grid.resolution),
            "period": list(grid.period),
        },
    )


def load_cochain(path: str | os.PathLike) -> Cochain:
    r"""Read a cochain; periods default to 1 without a sidecar.

    :param path:
    :type path: str | os.PathLike
    :rtype: Cochain
    """
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != COCHAIN_MAGIC:
        raise ContainerError(f"{path} is not a DCCH container")
    version, dim, degree = struct.unpack_from("<HBB", data, 4)
    if version != VERSION:
        raise ContainerError(f"unsupported DCCH version {version}")
    if dim not in {2, 3}:
        raise ContainerError(f"DCCH dimension {dim} out of range")
    offset = 8 + 4 * dim
    if len(data) < offset:
        raise ContainerError("truncated DCCH header")
    resolution = struct.unpack_from(f"<{dim}I", data, 8)
    dual = bool(degree & DUAL_BIT)
    degree &= ~DUAL_BIT
    period = _read_sidecar(path).get("period", [1.0] * dim)
    try:
        grid = PeriodicGrid(dim, tuple(resolution), tuple(period))
    except ValueError as e:
        raise ContainerError(f"bad DCCH grid: {e}") from e
    if degree > dim:
        raise ContainerError(f"DCCH degree {degree} exceeds dimension {dim}")
    expected = grid.cell_count(degree) * F64.itemsize
    if len(data) - offset != expected:
        raise ContainerError(
            f"DCCH payload has {len(data) - offset} bytes, "
            f"expected {expected}"
        )
    values = np.frombuffer(data, dtype=F64, offset=offset)
    try:
        return Cochain(grid, degree, values, dual)
    except ValueError as e:
        raise ContainerError(f"bad DCCH values: {e}") from e


def save_arrays(
    path: str | os.PathLike,
    arrays: dict[str, NDArray[np.float64]],
    metadata: dict[str, Any] | None = None,
) -> None:
    r"""Write named arrays in a GEOM container.

    :param path:
    :type path: str | os.PathLike
    :param arrays:
    :type arrays: dict[str, NDArray[np.float64]]
    :param metadata: copied into the sidecar
    :type metadata: dict[str, Any] | None
    :rtype: None
    """
    with open(path, "wb") as f:
        f.write(struct.pack("<4sHH", GEOMETRY_MAGIC, VERSION, len(arrays)))
        for values in arrays.values():
            f.write(np.ascontiguousarray(values, dtype=F64).tobytes())
    write_json(
        sidecar_path(path),
        {
            "magic": GEOMETRY_MAGIC.decode(),
            "version": VERSION,
            "arrays": [
                {"name": name, "shape": list(np.shape(values))}
                for name, values in arrays.items()
            ],
            "metadata": metadata or {},
        },
    )


def load_arrays(
    path: str | os.PathLike,
) -> tuple[dict[str, NDArray[np.float64]], dict[str, Any]]:
    r"""Read a GEOM container; its sidecar is required.

    :param path:
    :type path: str | os.PathLike
    :rtype: tuple[dict[str, NDArray[np.float64]], dict[str, Any]]
    """
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != GEOMETRY_MAGIC:
        raise ContainerError(f"{path} is not a GEOM container")
    version, count = struct.unpack_from("<HH", data, 4)
    if version != VERSION:
        raise ContainerError(f"unsupported GEOM version {version}")
    sidecar = _read_sidecar(path)
    entries = sidecar.get("arrays")
    if entries is None or len(entries) != count:
        raise ContainerError(f"{path} has no matching sidecar")
    arrays = {}
    offset = 8
    for entry in entries:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape, dtype=np.int64)) * F64.itemsize
        if offset + size > len(data):
            raise ContainerError(f"GEOM array {entry['name']} is truncated")
        arrays[entry["name"]] = np.frombuffer(
            data, dtype=F64, count=size // F64.itemsize, offset=offset
        ).reshape(shape)
        offset += size
    if offset != len(data):
        raise ContainerError(f"{len(data) - offset} trailing GEOM bytes")
    return arrays, sidecar.get("metadata", {})


def chart_metadata(chart: Chart) -> dict[str, Any]:
    r"""Chart fields besides the metric.

    :param chart:
    :type chart: Chart
    :rtype: dict[str, Any]
    """
    return {
        "dim": chart.dim,
        "codim": chart.codim,
        "lower": list(chart.lower),
        "upper": list(chart.upper),
        "resolution": list(chart.resolution),
        "periodic_axes": sorted(chart.periodic_axes),
    }


def save_frame_integral(fi: FrameIntegral, path: str | os.PathLike) -> None:
    r"""Write the frame, the position when present and the chart metric.

    :param fi:
    :type fi: FrameIntegral
    :param path:
    :type path: str | os.PathLike
    :rtype: None
    """
    arrays = {"metric": fi.chart.metric, "A": fi.A}
    if fi.f is not None:
        arrays["f"] = fi.f
    save_arrays(
        path,
        arrays,
        chart_metadata(fi.chart)
        | {
            "base": list(fi.base),
            "tree": fi.tree,
            "holonomy_defect": fi.holonomy_defect,
            "closedness_defect": fi.closedness_defect,
        },
    )


def load_frame_integral(path: str | os.PathLike) -> FrameIntegral:
    r"""Read a frame integral written by :func:`save_frame_integral`.

    :param path:
    :type path: str | os.PathLike
    :rtype: FrameIntegral
    """
    arrays, meta = load_arrays(path)
    try:
        chart = Chart(
            meta["dim"],
            meta["codim"],
            tuple(meta["lower"]),
            tuple(meta["upper"]),
            tuple(meta["resolution"]),
            frozenset(meta["periodic_axes"]),
            arrays["metric"],
        )
        return FrameIntegral(
            chart,
            arrays["A"],
            arrays.get("f"),
            float(meta["holonomy_defect"]),
            float(meta["closedness_defect"]),
            tuple(meta["base"]),
            meta["tree"],
        )
    except (KeyError, ValueError) as e:
        raise ContainerError(f"bad GEOM frame integral: {e}") from e
