r"""Div-curl negative control
=============================

``ω^ε = τ^ε = s(x₁ / ε) dx₁`` with a mean-zero profile ``s``: the pairing of
the weak limits vanishes while the pairings themselves approach
``mean(s²)`` times the integral of the test function. Cell averages damp
the profile, so a fast period spans ``cells_per_period`` cells.
``δτ^ε`` is not compact, which the ``deltaproxy`` column shows by not decaying.
"""

import numpy as np

from ..divcurl_lab import (
    PROFILES,
    SLOW_PROFILES,
    TEST_FUNCTIONS,
    OscillatoryFamily,
    divcurl_experiment,
    resolution_schedule,
)
from . import Outcome, Table, epsilons

NOTE = (
    "only the equi-integrability side of the W^{-1,1} endpoint lemma is "
    "measured"
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
    profile = PROFILES[params["profile"]]
    family = OscillatoryFamily(
        dim,
        resolution_schedule(
            dim, grid["n"], schedule, 0, 1.0, params["cells_per_period"]
        ),
        (1.0,) * dim,
        SLOW_PROFILES["one"],
        profile,
        0,
        tuple(schedule),
        1,
        (0,),
    )
    tests = [TEST_FUNCTIONS[name] for name in params["tests"]]
    report = divcurl_experiment(family, family, tests)
    # the predicted pairing of ψ is variance(s) ∫ψ
    predictions = {}
    for test in tests:
        finest = family.grid(-1)
        psi = test.sample(finest).values
        predictions[test.name] = profile.variance * float(
            np.sum(psi) * np.prod(finest.spacing)
        )
    final = {test.name: report.gaps(test.name)[-1] for test in tests}
    gap_ok = all(
        abs(final[name] - predictions[name])
        <= tolerances["gap_relative"] * abs(predictions[name])
        for name in predictions
    )
    proxies = report.proxies("deltaproxy")
    ratio = proxies[-1] / proxies[0] if proxies[0] else 0.0
    return Outcome(
        "divcurl_negative",
        {
            "gap_persists": gap_ok,
            "delta_not_compact": ratio >= tolerances["proxy_ratio"],
        },
        {
            "pairings": Table(report.columns, report.table()),
            "tails": Table(
                ("epsilon", "threshold", "tail"),
                [
                    (epsilon, threshold, tail)
                    for epsilon, tails in zip(
                        schedule, report.tails, strict=True
                    )
                    for threshold, tail in tails
                ],
            ),
        },
        {
            "final_gaps": final,
            "predicted_gaps": predictions,
            "limits": report.limits,
            "orders": report.orders,
            "deltaproxy_ratio": ratio,
            "resolutions": [list(r) for r in family.resolutions],
        },
        (NOTE,),
    )
