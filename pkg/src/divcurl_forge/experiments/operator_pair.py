r"""Operator pair
=================

The abstract pair ``S = δ``, ``T = d`` on 1-cochains: its kernel, the
orthogonality ``S T† = 0``, a certified coercivity constant, and a
compensated pairing along ``u^ε = w(x₂ / ε) dx₁`` (divergence free) and
``v^ε = s(x₁ / ε) dx₁`` (curl free) on one fixed grid.
"""

import logging

from ..divcurl_lab import (
    PROFILES,
    SLOW_PROFILES,
    OscillatoryFamily,
    gen_oscillatory_form,
    weak_limit,
)
from ..grid_complex import PeriodicGrid
from ..operator_core import (
    OperatorPair,
    certify_coercivity,
    check_orthogonality,
    coercivity_constant,
    compensated_pairing_test,
    kernel_basis,
)
from . import Outcome, Table, epsilons

logger = logging.getLogger(__name__)


def _family(
    n: int, schedule: list[float], profile: str, direction: int
) -> OscillatoryFamily:
    return OscillatoryFamily(
        2,
        ((n, n),) * len(schedule),
        (1.0, 1.0),
        SLOW_PROFILES["one"],
        PROFILES[profile],
        direction,
        tuple(schedule),
        1,
        (0,),
    )


def run(config: dict) -> Outcome:
    r"""Run.

    :param config:
    :type config: dict
    :rtype: Outcome
    """
    grid_config = config["grid"]
    params = config["params"]
    tolerances = config["tolerances"]
    rows = []
    betti = True
    orthogonal = 0.0
    for dim in grid_config["dims"]:
        for n in grid_config["ns"]:
            p = OperatorPair.from_grid(PeriodicGrid.uniform(dim, n), 1)
            basis = kernel_basis(p, tolerances["rank"])
            betti &= len(basis) == dim
            value = check_orthogonality(p)
            orthogonal = max(orthogonal, value)
            rows.append(("kernel", dim, n, float(len(basis))))
            rows.append(("orthogonality", dim, n, value))

    dim, n = 2, params["coercivity_n"]
    p = OperatorPair.from_grid(PeriodicGrid.uniform(dim, n), 1)
    constant = coercivity_constant(p)
    ratio = certify_coercivity(p, constant, params["samples"], config["seed"])
    rows.append(("coercivity_constant", dim, n, constant))
    rows.append(("coercivity_ratio", dim, n, ratio))

    n = grid_config["n"]
    schedule = epsilons(config["schedule"])
    u_family = _family(n, schedule, params["u_profile"], 1)
    v_family = _family(n, schedule, params["v_profile"], 0)
    p = OperatorPair.from_grid(u_family.grid(0), 1)
    indices = range(len(schedule))
    report = compensated_pairing_test(
        p,
        [gen_oscillatory_form(u_family, k).values for k in indices],
        [gen_oscillatory_form(v_family, k).values for k in indices],
        (weak_limit(u_family).values, weak_limit(v_family).values),
        schedule,
    )
    final = report.rows[-1].gap
    limit = abs(report.limit_pairing)
    logger.info(
        "operator_pair: C=%.4g ratio=%.6f final gap=%.3e",
        constant,
        ratio,
        final,
    )
    defects = max(max(row.s_defect, row.t_defect) for row in report.rows)
    return Outcome(
        "operator_pair",
        {
            "kernel_dimension": betti,
            "orthogonality": orthogonal <= tolerances["identity"],
            "coercivity_certified": ratio <= 1 + tolerances["certificate"],
            "pairing_converges": final <= tolerances["gap_relative"] * limit,
            "compact_images": defects <= tolerances["defect"],
        },
        {
            "pairing": Table(report.columns, report.table()),
            "checks": Table(("check", "dim", "n", "value"), rows),
        },
        {
            "coercivity_constant": constant,
            "certificate_ratio": ratio,
            "limit_pairing": report.limit_pairing,
            "order": report.order,
        },
    )
