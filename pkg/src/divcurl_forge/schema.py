r"""Schema
==========

Structural checks of an experiment config against the packaged JSON
schema, then the numerical preconditions of the modules it drives.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from jsonschema import Draft7Validator

from . import CELLS_PER_PERIOD
from .errors import ConfigError
from .experiments import EXPERIMENTS, epsilons
from .rigidity_experiments import IMMERSIVITY_BOUND
from .utils import deep_merge, get_defaults, get_schema, get_template

DIVCURL = {"divcurl_negative", "divcurl_positive"}
RIGIDITY = {"rigidity_control", "rigidity_corrugation"}
MIN_SCHEDULE = 3


@dataclass(frozen=True)
class Violation:
    r"""A broken rule, the dotted path of the field and the values the
    message template needs."""

    field: str
    rule: str
    context: dict[str, Any] = field(default_factory=dict)

    @property
    def message(self) -> str:
        r"""Message.

        :rtype: str
        """
        return get_template("violation.txt.j2").render(
            rule=self.rule, **self.context
        )

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def _path(error) -> str:
    return ".".join(str(part) for part in error.absolute_path) or "<root>"


def _structural(config: Any) -> list[Violation]:
    validator = Draft7Validator(get_schema("config"))
    return [
        Violation(_path(error), "schema", {"message": error.message})
        for error in sorted(validator.iter_errors(config), key=_path)
    ]


def merge_defaults(config: dict[str, Any]) -> dict[str, Any]:
    r"""Fill the fields a config leaves out from the experiment defaults.

    :param config:
    :type config: dict[str, Any]
    :rtype: dict[str, Any]
    """
    return deep_merge(get_defaults(config["experiment"]), config)


def _schedule(config: dict[str, Any]) -> list[Violation]:
    schedule = config.get("schedule")
    if schedule is None:
        return []
    violations = []
    if len(schedule) < MIN_SCHEDULE:
        violations.append(
            Violation(
                "schedule",
                "schedule length",
                {"minimum": MIN_SCHEDULE, "value": len(schedule)},
            )
        )
    if np.any(np.diff(schedule) <= 0):
        violations.append(
            Violation("schedule", "schedule order", {"value": schedule})
        )
    return violations


def _tolerances(config: dict[str, Any]) -> list[Violation]:
    return [
        Violation(
            f"tolerances.{name}",
            "positive tolerance",
            {"name": name, "value": value},
        )
        for name, value in sorted(config.get("tolerances", {}).items())
        if not value > 0
    ]


def _fast_axis(config: dict[str, Any]) -> tuple[str, int, float, int]:
    r"""Field, cells, length and the minimum cells per fast period of the
    axis the finest ``ε`` oscillates along."""
    grid = config["grid"]
    params = config.get("params", {})
    name = config["experiment"]
    if name in DIVCURL:
        minimum = params.get("cells_per_period", CELLS_PER_PERIOD)
        return "grid.max_n", grid["max_n"], 1.0, minimum
    if name in RIGIDITY:
        return (
            "grid.resolution",
            grid["resolution"][0] - 1,
            grid["length"],
            CELLS_PER_PERIOD,
        )
    return "grid.n", grid["n"], 1.0, CELLS_PER_PERIOD


def _resolvability(config: dict[str, Any]) -> list[Violation]:
    name = config["experiment"]
    if not config.get("schedule") or name == "rigidity_control":
        return []
    path, cells, length, minimum = _fast_axis(config)
    epsilon = min(epsilons(config["schedule"], length))
    per_period = cells * 2 * np.pi * epsilon / length
    if per_period >= minimum * (1 - 1e-12):
        return []
    return [
        Violation(
            path,
            "epsilon resolvability",
            {"value": epsilon, "cells": per_period, "minimum": minimum},
        )
    ]


def _immersivity(config: dict[str, Any]) -> list[Violation]:
    if config["experiment"] != "rigidity_corrugation":
        return []
    grid = config["grid"]
    epsilon = max(epsilons(config["schedule"], grid["length"]))
    value = config["params"]["amplitude"] * epsilon
    if value < IMMERSIVITY_BOUND:
        return []
    return [
        Violation(
            "params.amplitude",
            "immersivity",
            {"value": value, "bound": IMMERSIVITY_BOUND},
        )
    ]


def _grid_size(config: dict[str, Any]) -> list[Violation]:
    grid = config["grid"]
    maximum = grid.get("max_n")
    if maximum is None or grid.get("n", 0) <= maximum:
        return []
    return [
        Violation(
            "grid.n", "grid size", {"value": grid["n"], "maximum": maximum}
        )
    ]


def validate(config: Any) -> list[Violation]:
    r"""All violations of a config; an empty list means it is valid.

    Fields left out are checked after merging the defaults.

    :param config:
    :type config: Any
    :rtype: list[Violation]
    """
    if isinstance(config, dict) and "experiment" in config:
        name = config["experiment"]
        if name not in EXPERIMENTS:
            return [
                Violation(
                    "experiment",
                    "unknown name",
                    {"value": name, "choices": sorted(EXPERIMENTS)},
                )
            ]
    violations = _structural(config)
    if violations:
        return violations
    config = merge_defaults(config)
    violations = _structural(config)
    if violations:
        return violations
    for rule in (
        _schedule,
        _tolerances,
        _grid_size,
        _resolvability,
        _immersivity,
    ):
        violations.extend(rule(config))
    return violations


def load_config(path: str | os.PathLike) -> dict[str, Any]:
    r"""Read a config file; a file that is not JSON raises
    :class:`ConfigError`.

    :param path:
    :type path: str | os.PathLike
    :rtype: dict[str, Any]
    """
    with open(path) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(
                [Violation("<root>", "schema", {"message": str(e)})]
            ) from e


def check(config: Any) -> dict[str, Any]:
    r"""The merged config, or :class:`ConfigError` with every violation.

    :param config:
    :type config: Any
    :rtype: dict[str, Any]
    """
    violations = validate(config)
    if violations:
        raise ConfigError(violations)
    return merge_defaults(config)
