r"""This module can be called by
`python -m <https://docs.python.org/3/library/__main__.html>`_.
"""

import logging
import sys
from argparse import ArgumentParser, Namespace, RawDescriptionHelpFormatter
from datetime import datetime

from . import EXPERIMENT, __version__
from . import __name__ as NAME

try:
    import shtab

    FILE, DIRECTORY = shtab.FILE, shtab.DIRECTORY
except ImportError:
    shtab = None
    FILE = DIRECTORY = None

NAME = NAME.replace("_", "-")
VERSION = rf"""{NAME} {__version__}
Copyright (C) {datetime.now().year}
"""
EPILOG = """
exit status: 0 all verdicts pass, 1 a verdict fails, 2 invalid config,
3 runtime error.
"""
PASS, FAIL, INVALID, RUNTIME = range(4)

logger = logging.getLogger(__name__)


def _add_config_arguments(parser: ArgumentParser) -> None:
    parser.add_argument(
        "experiment",
        nargs="?",
        choices=EXPERIMENT.__args__,  # type: ignore
        help="experiment name, overrides the one of --config",
    )
    parser.add_argument(
        "--config", help="JSON config file"
    ).complete = FILE  # type: ignore
    parser.add_argument(
        "--seed", type=int, help="override the seed of the config"
    )


def get_parser() -> ArgumentParser:
    r"""Get a parser for unit test.

    :rtype: ArgumentParser
    """
    parser = ArgumentParser(
        prog=NAME,
        epilog=EPILOG,
        formatter_class=RawDescriptionHelpFormatter,
    )
    if shtab is not None:
        shtab.add_argument_to(parser)
    parser.add_argument("--version", version=VERSION, action="version")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log INFO, then DEBUG, to stderr",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("list", help="list registered experiments")
    _add_config_arguments(
        subparsers.add_parser("validate", help="check a config")
    )
    run = subparsers.add_parser("run", help="run an experiment")
    _add_config_arguments(run)
    run.add_argument(
        "--out", help="directory of the artifacts"
    ).complete = DIRECTORY  # type: ignore
    return parser


def _config(args: Namespace) -> dict:
    from .schema import load_config

    config = load_config(args.config) if args.config else {}
    if args.experiment:
        config["experiment"] = args.experiment
    if args.seed is not None:
        config["seed"] = args.seed
    return config


def _run(args: Namespace) -> int:
    from .errors import ConfigError
    from .experiments import list_experiments

    if args.command == "list":
        for name, description in list_experiments():
            print(f"{name}\t{description}")
        return PASS

    from .experiments import run_experiment, write_artifacts
    from .schema import check
    from .utils import default_output_dir

    try:
        config = check(_config(args))
    except ConfigError as e:
        for violation in e.violations:
            print(violation, file=sys.stderr)
        return INVALID
    if args.command == "validate":
        print("ok")
        return PASS
    output = config.pop("output", None)
    directory = args.out or output or default_output_dir(config["experiment"])
    outcome = run_experiment(config)
    for path in write_artifacts(outcome, config, directory):
        print(path)
    return PASS if outcome.passed else FAIL


def main(argv: list[str] | None = None) -> None:
    r"""Parse arguments, run the subcommand and exit with its status.

    :param argv:
    :type argv: list[str] | None
    :rtype: None
    """
    args = get_parser().parse_args(argv)
    logging.basicConfig(
        level=max(logging.WARNING - 10 * args.verbose, logging.DEBUG),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    from .errors import DivCurlForgeError

    try:
        status = _run(args)
    except (DivCurlForgeError, OSError) as e:
        logger.error("%s", e)
        status = RUNTIME
    sys.exit(status)


if __name__ == "__main__":
    main()
