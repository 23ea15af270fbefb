r"""Realization round trip
==========================

Rebuild golden surfaces from their fundamental data by integrating the
frame and position equations, then compare with the original after a
rigid alignment. Also checks gauge covariance, the order of the holonomy
defect and its linear response to an injected curvature defect.
"""

import logging

import numpy as np
from scipy.stats import special_ortho_group

from ..cartan_realization import (
    FrameIntegral,
    FramePack,
    connection_forms,
    frame_matrix,
    inject_curvature_defect,
    orthogonality_drift,
    pfaff_defining_residual,
    reconstruct,
    rigid_motion_align,
    structural_residuals,
    volume_weights,
)
from ..immersion_geometry import fundamental_data
from ..surfaces import golden_surface
from ..utils import fit_order
from . import Outcome, Table

logger = logging.getLogger(__name__)

COLUMNS = (
    "surface",
    "resolution",
    "h",
    "rms",
    "diameter",
    "holonomy",
    "closedness",
    "structural",
    "pfaff_residual",
    "orthogonality_drift",
    "tree_difference",
)


def _diameter(points: np.ndarray) -> float:
    flat = points.reshape(-1, points.shape[-1])
    return float(np.linalg.norm(np.ptp(flat, axis=0)))


def _weighted_rms(difference: np.ndarray, weights: np.ndarray) -> float:
    weights = weights / weights.sum()
    return float(np.sqrt(np.sum(weights * np.sum(difference**2, axis=-1))))


def round_trip(name: str, resolution: int) -> tuple[dict, tuple]:
    r"""Reconstruct a golden surface from the first node of its chart.

    Returns the measured row and what gauge and defect checks reuse:
    the frame pack, the base frame and base position.

    :param name:
    :type name: str
    :param resolution:
    :type resolution: int
    :rtype: tuple[dict, tuple]
    """
    surface = golden_surface(name, resolution, analytic=True)
    chart = surface.chart
    fd = fundamental_data(surface.immersion)
    fp = connection_forms(chart, fd)
    base = (0,) * chart.dim
    A0 = frame_matrix(fd)[base]
    f0 = surface.immersion.f[base]
    fi = reconstruct(fp, A0, f0)
    other = reconstruct(fp, A0, f0, tree="column_major")
    alignment = rigid_motion_align(fi.f, surface.immersion.f, chart)
    structural = structural_residuals(fp)
    row = {
        "surface": name,
        "resolution": resolution,
        "h": float(max(chart.spacing)),
        "rms": alignment.rms,
        "diameter": _diameter(surface.immersion.f),
        "holonomy": fi.holonomy_defect,
        "closedness": fi.closedness_defect,
        "structural": max(structural.sup.values()),
        "pfaff_residual": pfaff_defining_residual(fp, fi),
        "orthogonality_drift": orthogonality_drift(fi),
        "tree_difference": float(np.abs(fi.f - other.f).max()),
    }
    return row, (fp, A0, f0, fi)


def gauge_defect(
    fp: FramePack,
    A0: np.ndarray,
    f0: np.ndarray,
    fi: FrameIntegral,
    seed: int,
) -> float:
    r"""Weighted rms between the reconstruction from a rotated and
    translated base and the same rigid motion of the original.

    :param fp:
    :type fp: FramePack
    :param A0:
    :type A0: np.ndarray
    :param f0:
    :type f0: np.ndarray
    :param fi:
    :type fi: FrameIntegral
    :param seed:
    :type seed: int
    :rtype: float
    """
    size = A0.shape[0]
    rotation = special_ortho_group.rvs(size, random_state=seed)
    translation = np.random.default_rng(seed).standard_normal(size)
    moved = reconstruct(fp, A0 @ rotation.T, rotation @ f0 + translation)
    expected = fi.f @ rotation.T + translation
    return _weighted_rms(moved.f - expected, volume_weights(fp.chart))


def run(config: dict) -> Outcome:
    r"""Run.

    :param config:
    :type config: dict
    :rtype: Outcome
    """
    params = config["params"]
    tolerances = config["tolerances"]
    seed = config["seed"]
    resolutions = sorted(config["grid"]["ns"])
    rows = []
    verdicts = {}
    summary = {"holonomy_order": {}, "gauge_rms": {}, "unmeasured_orders": []}
    for name in params["surfaces"]:
        measured = [round_trip(name, n) for n in resolutions]
        surface_rows = [row for row, _ in measured]
        rows.extend(surface_rows)
        finest = surface_rows[-1]
        verdicts[f"{name}_reconstruction"] = (
            finest["rms"] <= tolerances["rms_relative"] * finest["diameter"]
        )
        fp, A0, f0, fi = measured[-1][1]
        gauge = gauge_defect(fp, A0, f0, fi, seed)
        summary["gauge_rms"][name] = gauge
        verdicts[f"{name}_gauge"] = gauge <= tolerances["gauge"]
        order = fit_order(
            [row["h"] for row in surface_rows],
            [row["holonomy"] for row in surface_rows],
        )
        summary["holonomy_order"][name] = order
        if order is None:
            summary["unmeasured_orders"].append(name)
        verdicts[f"{name}_holonomy_order"] = (
            order is None or order >= tolerances["holonomy_order"]
        )

    name, resolution = params["defect_surface"], resolutions[0]
    _, (fp, A0, f0, _) = round_trip(name, resolution)
    strengths = params["defect_strengths"]
    defects = [
        reconstruct(inject_curvature_defect(fp, rho), A0, f0).holonomy_defect
        for rho in strengths
    ]
    slope = fit_order(strengths, defects)
    summary["defect_slope"] = slope
    verdicts["defect_linear"] = (
        slope is not None and abs(slope - 1) <= tolerances["linearity"]
    )
    logger.info("realization_roundtrip: %s", summary)
    return Outcome(
        "realization_roundtrip",
        verdicts,
        {
            "roundtrip": Table(
                COLUMNS,
                [tuple(row[column] for column in COLUMNS) for row in rows],
            ),
            "defects": Table(
                ("rho", "holonomy"), list(zip(strengths, defects, strict=True))
            ),
        },
        summary,
    )
