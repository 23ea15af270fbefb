r"""Test utils."""

import json

import numpy as np
import pytest

from divcurl_forge.utils import (
    config_hash,
    deep_merge,
    fit_order,
    get_defaults,
    get_schema,
    write_csv,
    write_json,
)


class Test:
    r"""Test."""

    @staticmethod
    def test_get_schema() -> None:
        r"""Test get schema.

        :rtype: None
        """
        assert len(
            get_schema("config")
            .get("properties", {})
            .get("experiment", {})
            .get("description", "")
            .splitlines()
        )

    @staticmethod
    def test_get_defaults() -> None:
        r"""Test get defaults.

        :rtype: None
        """
        defaults = get_defaults("hodge_suite")
        defaults["grid"]["dims"].append(4)
        assert get_defaults("hodge_suite")["grid"]["dims"] == [2, 3]

    @staticmethod
    def test_deep_merge() -> None:
        r"""Test deep merge.

        :rtype: None
        """
        merged = deep_merge(
            {"grid": {"n": 8, "dim": 2}, "schedule": [1, 2, 3]},
            {"grid": {"n": 16}, "schedule": [4]},
        )
        assert merged == {"grid": {"n": 16, "dim": 2}, "schedule": [4]}

    @staticmethod
    def test_config_hash() -> None:
        r"""Test config hash.

        :rtype: None
        """
        first = config_hash({"seed": 0, "experiment": "gcr_golden"})
        second = config_hash({"experiment": "gcr_golden", "seed": 0})
        assert first == second
        assert first != config_hash({"experiment": "gcr_golden", "seed": 1})

    @staticmethod
    def test_fit_order() -> None:
        r"""Test fit order.

        :rtype: None
        """
        steps = [0.1, 0.05, 0.025]
        errors = [3 * h**2 for h in steps]
        assert fit_order(steps, errors) == pytest.approx(2.0)
        assert fit_order(steps, [0.0, 1e-16, 0.0]) is None

    @staticmethod
    def test_write(tmp_path) -> None:
        r"""Test write.

        :param tmp_path:
        :rtype: None
        """
        path = tmp_path / "summary.json"
        write_json(path, {"order": np.float64(np.nan), "ok": np.bool_(True)})
        assert json.loads(path.read_text()) == {"ok": True, "order": "nan"}
        path = tmp_path / "table.csv"
        write_csv(
            path,
            ("epsilon", "order"),
            [(0.5, None)],
            {"experiment": "gcr_golden", "table": "residuals", "notes": ()},
        )
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        assert lines[-2:] == ["epsilon,order", "0.5,"]
