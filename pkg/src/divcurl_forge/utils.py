r"""Utils
=========
"""

import csv
import hashlib
import json
import os
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from jinja2 import Template
from platformdirs import user_config_path, user_data_path

from . import EXPERIMENT
from . import __name__ as NAME

NAME = NAME.replace("_", "-")
ASSETS = Path(__file__).parent / "assets"
SCHEMAS = {}
TEMPLATES = {}


def get_schema(name: str = "config") -> dict[str, Any]:
    r"""Get schema.

    :param name:
    :type name: str
    :rtype: dict[str, Any]
    """
    if name not in SCHEMAS:
        with open(ASSETS / "json" / f"{name}{os.path.extsep}json") as f:
            SCHEMAS[name] = json.load(f)
    return SCHEMAS[name]


def get_defaults(experiment: EXPERIMENT) -> dict[str, Any]:
    r"""Get the default configuration of an experiment.

    :param experiment:
    :type experiment: EXPERIMENT
    :rtype: dict[str, Any]
    """
    key = f"defaults/{experiment}"
    if key not in SCHEMAS:
        path = ASSETS / "json" / "defaults" / f"{experiment}.json"
        with open(path) as f:
            SCHEMAS[key] = json.load(f)
    return json.loads(json.dumps(SCHEMAS[key]))


def get_template(name: str) -> Template:
    r"""Get a jinja2 template. A file of the same name under the user's
    config directory takes precedence over the packaged one.

    :param name:
    :type name: str
    :rtype: Template
    """
    if name not in TEMPLATES:
        path = user_config_path(NAME) / name
        if not path.exists():
            path = ASSETS / "jinja2" / name
        TEMPLATES[name] = Template(path.read_text())
    return TEMPLATES[name]


def default_output_dir(experiment: str) -> Path:
    r"""Default output dir.

    :param experiment:
    :type experiment: str
    :rtype: Path
    """
    return user_data_path(NAME) / "runs" / experiment


def deep_merge(
    base: Mapping[str, Any], override: Mapping[str, Any]
) -> dict[str, Any]:
    r"""Merge ``override`` into ``base`` recursively.

    :param base:
    :type base: Mapping[str, Any]
    :param override:
    :type override: Mapping[str, Any]
    :rtype: dict[str, Any]
    """
    result = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(result.get(key), Mapping):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def canonical_json(data: Any) -> str:
    r"""Canonical json.

    :param data:
    :type data: Any
    :rtype: str
    """
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(config: Mapping[str, Any]) -> str:
    r"""First 16 hex digits of the SHA-256 of the canonical JSON.

    :param config:
    :type config: Mapping[str, Any]
    :rtype: str
    """
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


def fit_order(
    steps: Sequence[float], errors: Sequence[float], scale: float = 1.0
) -> float | None:
    r"""Least-squares slope of ``log error`` against ``log step``.

    Errors at round-off (below ``1e-12 * max(scale, 1)``) are left out;
    with fewer than two entries left the sequence counts as exact and the
    result is None.

    :param steps:
    :type steps: Sequence[float]
    :param errors:
    :type errors: Sequence[float]
    :param scale:
    :type scale: float
    :rtype: float | None
    """
    steps = np.asarray(steps, dtype=np.float64)
    errors = np.abs(np.asarray(errors, dtype=np.float64))
    keep = errors > 1e-12 * max(abs(scale), 1.0)
    if np.count_nonzero(keep) < 2:
        return None
    slope, _ = np.polyfit(np.log(steps[keep]), np.log(errors[keep]), 1)
    return float(slope)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def write_csv(
    path: str | os.PathLike,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    header: Mapping[str, Any],
) -> None:
    r"""Write a table with a ``#`` comment header rendered by jinja2.

    :param path:
    :type path: str | os.PathLike
    :param columns:
    :type columns: Sequence[str]
    :param rows:
    :type rows: Iterable[Sequence[Any]]
    :param header:
    :type header: Mapping[str, Any]
    :rtype: None
    """
    comment = get_template("header.csv.j2").render(**header)
    with open(path, "w", newline="") as f:
        f.write(comment.rstrip("\n") + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(value) for value in row])


def _plain(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        value = float(value)
        return value if np.isfinite(value) else repr(value)
    return value


def write_json(path: str | os.PathLike, data: Mapping[str, Any]) -> None:
    r"""Write json with sorted keys; non-finite floats become strings.

    :param path:
    :type path: str | os.PathLike
    :param data:
    :type data: Mapping[str, Any]
    :rtype: None
    """
    with open(path, "w") as f:
        json.dump(_plain(data), f, indent=2, sort_keys=True)
        f.write("\n")
