r"""Test schema."""

import pytest

from divcurl_forge import EXPERIMENT
from divcurl_forge.errors import ConfigError
from divcurl_forge.schema import check, load_config, validate


class Test:
    r"""Test."""

    @staticmethod
    @pytest.mark.parametrize("name", EXPERIMENT.__args__)  # type: ignore
    def test_defaults(name: str) -> None:
        r"""Test defaults.

        :param name:
        :type name: str
        :rtype: None
        """
        assert validate({"experiment": name}) == []
        config = check({"experiment": name, "seed": 3})
        assert config["seed"] == 3
        assert "tolerances" in config

    @staticmethod
    def test_unknown_name() -> None:
        r"""Test unknown name.

        :rtype: None
        """
        (violation,) = validate({"experiment": "nope"})
        assert violation.rule == "unknown name"
        assert "hodge_suite" in violation.message

    @staticmethod
    def test_schema() -> None:
        r"""Test schema.

        :rtype: None
        """
        violations = validate({"experiment": "hodge_suite", "grid": {"n": 2}})
        assert [v.field for v in violations] == ["grid.n"]
        assert violations[0].rule == "schema"
        assert validate({"foo": 1})

    @staticmethod
    def test_resolvability() -> None:
        r"""Test resolvability.

        :rtype: None
        """
        (violation,) = validate(
            {"experiment": "operator_pair", "schedule": [1, 2, 3, 4, 5]}
        )
        assert violation.rule == "epsilon resolvability"
        assert violation.field == "grid.n"
        assert "fewer than 8" in str(violation)

    @staticmethod
    def test_tolerance() -> None:
        r"""Test tolerance.

        :rtype: None
        """
        (violation,) = validate(
            {"experiment": "hodge_suite", "tolerances": {"identity": -1}}
        )
        assert violation.field == "tolerances.identity"
        assert violation.rule == "positive tolerance"

    @staticmethod
    def test_schedule() -> None:
        r"""Test schedule.

        :rtype: None
        """
        rules = [
            v.rule
            for v in validate(
                {"experiment": "divcurl_negative", "schedule": [5, 4]}
            )
        ]
        assert rules == ["schedule length", "schedule order"]

    @staticmethod
    def test_immersivity() -> None:
        r"""Test immersivity.

        :rtype: None
        """
        (violation,) = validate(
            {
                "experiment": "rigidity_corrugation",
                "schedule": [0, 1, 2],
                "params": {"amplitude": 4.0},
            }
        )
        assert violation.rule == "immersivity"

    @staticmethod
    def test_grid_size() -> None:
        r"""Test grid size.

        :rtype: None
        """
        violations = validate(
            {"experiment": "divcurl_negative", "grid": {"n": 8192}}
        )
        assert "grid size" in [v.rule for v in violations]

    @staticmethod
    def test_load_config(tmp_path) -> None:
        r"""Test load config.

        :param tmp_path:
        :rtype: None
        """
        path = tmp_path / "config.json"
        path.write_text("{")
        with pytest.raises(ConfigError) as e:
            load_config(path)
        assert e.value.violations[0].rule == "schema"
