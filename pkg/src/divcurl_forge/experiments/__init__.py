r"""Experiments
===============

Every experiment module exposes ``run(config) -> Outcome``; modules are
imported on first use.
"""

import logging
import os
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .. import EXPERIMENT, __version__
from ..utils import config_hash, write_csv, write_json

logger = logging.getLogger(__name__)

EXPERIMENTS: dict[str, str] = {
    "divcurl_negative": "an oscillating form paired with itself keeps a gap",
    "divcurl_positive": "closed and co-closed oscillating forms pair to "
    "the product of their limits",
    "gcr_golden": "Gauss, Codazzi and Ricci residuals on closed-form "
    "surfaces",
    "hodge_suite": "chain, adjointness, topology and Hodge decomposition "
    "checks of the grid complex",
    "operator_pair": "kernel, orthogonality, coercivity and compensated "
    "pairing of the grid operator pair",
    "realization_roundtrip": "surfaces rebuilt from their fundamental data "
    "by frame integration",
    "rigidity_control": "a stretched strip fails the isometry check, a "
    "constant family passes",
    "rigidity_corrugation": "corrugated isometric strips converge to an "
    "isometric limit",
}


@dataclass(frozen=True)
class Table:
    r"""Plot-ready rows under named columns."""

    columns: tuple[str, ...]
    rows: list[tuple] = field(repr=False)


@dataclass(frozen=True)
class Outcome:
    r"""Verdict flags, tables and a summary block of one run.

    The first table is the main one; ``notes`` go into every CSV header.
    """

    experiment: str
    verdicts: dict[str, bool]
    tables: dict[str, Table]
    summary: dict[str, Any]
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        r"""Passed.

        :rtype: bool
        """
        return all(self.verdicts.values())


def list_experiments() -> list[tuple[str, str]]:
    r"""Registered experiments and their descriptions, alphabetized.

    :rtype: list[tuple[str, str]]
    """
    return sorted(EXPERIMENTS.items())


def get_runner(experiment: EXPERIMENT) -> Callable[[dict], Outcome]:
    r"""Get runner.

    :param experiment:
    :type experiment: EXPERIMENT
    :rtype: Callable[[dict], Outcome]
    """
    if experiment == "divcurl_negative":
        from .divcurl_negative import run
    elif experiment == "divcurl_positive":
        from .divcurl_positive import run
    elif experiment == "gcr_golden":
        from .gcr_golden import run
    elif experiment == "hodge_suite":
        from .hodge_suite import run
    elif experiment == "operator_pair":
        from .operator_pair import run
    elif experiment == "realization_roundtrip":
        from .realization_roundtrip import run
    elif experiment in {"rigidity_control", "rigidity_corrugation"}:
        from .rigidity import run
    else:
        raise NotImplementedError(experiment)
    return run


def epsilons(schedule: Sequence[int], length: float = 1.0) -> list[float]:
    r"""``ε_j = L 2^{-j} / (2π)``, so one fast period spans ``2^{-j}``
    of the domain.

    :param schedule:
    :type schedule: Sequence[int]
    :param length:
    :type length: float
    :rtype: list[float]
    """
    return [length * 2.0 ** -int(j) / (2 * np.pi) for j in schedule]


def run_experiment(config: dict[str, Any]) -> Outcome:
    r"""Run a validated, merged config.

    :param config:
    :type config: dict[str, Any]
    :rtype: Outcome
    """
    name = config["experiment"]
    logger.info("running %s (config %s)", name, config_hash(config))
    outcome = get_runner(name)(config)
    logger.info("%s verdicts: %s", name, outcome.verdicts)
    return outcome


def write_artifacts(
    outcome: Outcome, config: dict[str, Any], directory: str | os.PathLike
) -> list[Path]:
    r"""Write ``<experiment>.csv``, ``<experiment>_<table>.csv`` for the
    other tables and ``<experiment>.json``.

    :param outcome:
    :type outcome: Outcome
    :param config:
    :type config: dict[str, Any]
    :param directory:
    :type directory: str | os.PathLike
    :rtype: list[Path]
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config)
    paths = []
    for index, (name, table) in enumerate(outcome.tables.items()):
        stem = outcome.experiment
        if index:
            stem = f"{stem}_{name}"
        path = directory / f"{stem}.csv"
        write_csv(
            path,
            table.columns,
            table.rows,
            {
                "experiment": outcome.experiment,
                "table": name,
                "config_hash": digest,
                "seed": config.get("seed", 0),
                "version": __version__,
                "notes": outcome.notes,
            },
        )
        paths.append(path)
    path = directory / f"{outcome.experiment}.json"
    write_json(
        path,
        {
            "experiment": outcome.experiment,
            "config": config,
            "config_hash": digest,
            "version": __version__,
            "verdicts": outcome.verdicts,
            "passed": outcome.passed,
            "summary": outcome.summary,
            "notes": list(outcome.notes),
        },
    )
    paths.append(path)
    return paths
