r"""Div-curl positive control
=============================

``ω^ε = w(x₁ / ε) dx₁`` is closed and ``τ^ε = u(x₂ / ε) dx₁`` is co-closed,
so the pairing converges to ``mean(w) mean(u) ∫ψ``. Both fast axes are
refined together.
"""

from ..divcurl_lab import (
    PROFILES,
    SLOW_PROFILES,
    TEST_FUNCTIONS,
    OscillatoryFamily,
    divcurl_experiment,
    resolution_schedule,
)
from . import Outcome, Table, epsilons
from .divcurl_negative import NOTE


def _family(
    dim: int,
    resolutions: tuple,
    schedule: list[float],
    profile: str,
    direction: int,
) -> OscillatoryFamily:
    return OscillatoryFamily(
        dim,
        resolutions,
        (1.0,) * dim,
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
    grid = config["grid"]
    params = config["params"]
    tolerances = config["tolerances"]
    dim = grid["dim"]
    schedule = epsilons(config["schedule"])
    resolutions = tuple(
        (fast, fast) + (grid["n"],) * (dim - 2)
        for fast, *_ in resolution_schedule(
            dim, grid["n"], schedule, 0, 1.0, params["cells_per_period"]
        )
    )
    omega = _family(
        dim, resolutions, schedule, params["closed_profile"], 0
    )
    tau = _family(
        dim, resolutions, schedule, params["coclosed_profile"], 1
    )
    tests = [TEST_FUNCTIONS[name] for name in params["tests"]]
    report = divcurl_experiment(omega, tau, tests)
    volume = omega.grid(-1).volume
    verdicts = {}
    for test in tests:
        gaps = report.gaps(test.name)
        limit = abs(report.limits[test.name])
        order = report.orders[test.name]
        verdicts[f"{test.name}_final_gap"] = (
            gaps[-1] <= tolerances["gap_relative"] * limit
        )
        verdicts[f"{test.name}_decay"] = (
            order is None
            or order >= tolerances["min_order"]
            or max(gaps) <= tolerances["exact_gap"] * volume
        )
    return Outcome(
        "divcurl_positive",
        verdicts,
        {"pairings": Table(report.columns, report.table())},
        {
            "limits": report.limits,
            "orders": report.orders,
            "unmeasured_orders": [
                name for name, order in report.orders.items() if order is None
            ],
            "resolutions": [list(r) for r in resolutions],
        },
        (NOTE,),
    )
