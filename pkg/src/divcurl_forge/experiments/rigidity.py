r"""Rigidity families
=====================

``rigidity_corrugation`` bends a flat strip with curvature
``κ₀ sin(x / ε)``: every member is isometric, ``B^ε`` converges only
weakly, and the limit must pass the isometry, GCR and structural checks.
``rigidity_control`` runs a uniformly stretched strip, which must fail the
isometry check alone, next to a constant family, which must pass.
"""

import logging

from ..rigidity_experiments import (
    RIGIDITY_TESTS,
    RigidityReport,
    bending_family,
    rigidity_report,
    strip_chart,
)
from . import Outcome, Table, epsilons

logger = logging.getLogger(__name__)


def _report(config: dict, kind: str, **options) -> RigidityReport:
    grid = config["grid"]
    tolerances = config["tolerances"]
    chart = strip_chart(grid["length"], grid["height"], grid["resolution"])
    family = bending_family(
        kind, epsilons(config["schedule"], grid["length"]), chart, **options
    )
    tests = [RIGIDITY_TESTS[name] for name in config["params"]["tests"]]
    return rigidity_report(
        family,
        tests,
        tolerances["isometry"],
        tolerances["gcr"],
        tolerances["structural"],
        tolerances["member_structural"],
    )


def _members(reports: dict[str, RigidityReport]) -> Table:
    return Table(
        ("kind", *RigidityReport.columns),
        [
            (kind, *row)
            for kind, report in reports.items()
            for row in report.table()
        ],
    )


def corrugation(config: dict) -> Outcome:
    r"""Corrugation.

    :param config:
    :type config: dict
    :rtype: Outcome
    """
    params = config["params"]
    tolerances = config["tolerances"]
    report = _report(
        config, "corrugated_strip", amplitude=params["amplitude"]
    )
    order = report.limit.orders[params["order_test"]]
    isometry = max(row.isometry for row in report.rows)
    return Outcome(
        "rigidity_corrugation",
        {
            "limit_verdict": report.verdict,
            "members_isometric": isometry <= tolerances["isometry"],
            "weak_decay": order is not None
            and order >= tolerances["min_order"],
            "uniformly_bounded": report.uniformly_bounded,
            "members_sampled": all(
                row.sampling <= row.sampling_bound for row in report.rows
            ),
        },
        {
            "members": _members({report.kind: report}),
            "pairings": Table(report.limit.columns, report.limit.table()),
        },
        report.summary() | {"max_member_isometry": isometry},
    )


def control(config: dict) -> Outcome:
    r"""Control.

    :param config:
    :type config: dict
    :rtype: Outcome
    """
    params = config["params"]
    tolerances = config["tolerances"]
    stretched = _report(config, "scaled_flat", stretch=params["stretch"])
    constant = _report(
        config, "constant", curvature=params["constant_curvature"]
    )
    checks = stretched.checks
    defect = checks["a_isometry"].value
    return Outcome(
        "rigidity_control",
        {
            "stretched_fails_isometry": not checks["a_isometry"].passed,
            "stretched_defect": abs(defect - params["expected_defect"])
            <= tolerances["defect"],
            "stretched_other_checks": checks["b_gcr"].passed
            and checks["c_structural"].passed,
            "constant_passes": constant.verdict,
        },
        {
            "members": _members(
                {"scaled_flat": stretched, "constant": constant}
            )
        },
        {
            "scaled_flat": stretched.summary(),
            "constant": constant.summary(),
        },
    )


def run(config: dict) -> Outcome:
    r"""Run either rigidity experiment.

    :param config:
    :type config: dict
    :rtype: Outcome
    """
    if config["experiment"] == "rigidity_control":
        outcome = control(config)
    else:
        outcome = corrugation(config)
    logger.info("%s: %s", outcome.experiment, outcome.verdicts)
    return outcome
