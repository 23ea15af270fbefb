r"""Test cli."""

import json

import pytest

from divcurl_forge.__main__ import get_parser, main


def status(argv: list[str]) -> int:
    r"""Exit status of the command line.

    :param argv:
    :type argv: list[str]
    :rtype: int
    """
    with pytest.raises(SystemExit) as e:
        main(argv)
    return e.value.code


class Test:
    r"""Test."""

    @staticmethod
    def test_parser() -> None:
        r"""Test parser.

        :rtype: None
        """
        args = get_parser().parse_args(
            ["run", "hodge_suite", "--seed", "2", "--out", "runs"]
        )
        assert args.command == "run"
        assert args.experiment == "hodge_suite"
        assert args.seed == 2
        with pytest.raises(SystemExit):
            get_parser().parse_args(["run", "nope"])

    @staticmethod
    def test_list(capsys) -> None:
        r"""Test list.

        :param capsys:
        :rtype: None
        """
        assert status(["list"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 8
        assert lines[0].startswith("divcurl_negative\t")

    @staticmethod
    def test_validate(tmp_path, capsys) -> None:
        r"""Test validate.

        :param tmp_path:
        :param capsys:
        :rtype: None
        """
        assert status(["validate", "gcr_golden"]) == 0
        assert capsys.readouterr().out == "ok\n"
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {"experiment": "operator_pair", "schedule": [1, 2, 3, 4, 5]}
            )
        )
        assert status(["validate", "--config", str(path)]) == 2
        assert "fewer than 8" in capsys.readouterr().err
        assert status(["validate", "--config", str(tmp_path / "none")]) == 3

    @staticmethod
    def test_run(tmp_path, capsys) -> None:
        r"""Test run.

        :param tmp_path:
        :param capsys:
        :rtype: None
        """
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {
                    "experiment": "hodge_suite",
                    "grid": {"dims": [2], "ns": [8]},
                    "params": {"topology_ns": [4, 8], "decomposition_n": 8},
                }
            )
        )
        out = tmp_path / "out"
        assert status(["run", "--config", str(path), "--out", str(out)]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 2
        summary = json.loads((out / "hodge_suite.json").read_text())
        assert summary["passed"]
        assert summary["config"]["params"]["laplacian_n"] == 8
        assert (out / "hodge_suite.csv").exists()

    @staticmethod
    def test_run_deterministic(tmp_path, capsys) -> None:
        r"""Test run deterministic.

        :param tmp_path:
        :param capsys:
        :rtype: None
        """
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {
                    "experiment": "hodge_suite",
                    "seed": 3,
                    "grid": {"dims": [2], "ns": [8]},
                    "params": {"topology_ns": [4, 8], "decomposition_n": 8},
                }
            )
        )
        outs = [tmp_path / "first", tmp_path / "second"]
        for out in outs:
            assert (
                status(["run", "--config", str(path), "--out", str(out)]) == 0
            )
        capsys.readouterr()
        names = sorted(p.name for p in outs[0].iterdir())
        assert names == sorted(p.name for p in outs[1].iterdir())
        assert "hodge_suite.csv" in names
        for name in names:
            assert (outs[0] / name).read_bytes() == (
                outs[1] / name
            ).read_bytes()
