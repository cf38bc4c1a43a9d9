"""gsdefend command line.

    gsdefend gen|poison|train|eval|spectrum|report [--config FILE] [--seed N] [--out DIR] [--mode MODE]

This is the only place exceptions are caught: each family maps to an exit code and the
error is printed to stderr as one JSON object.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from gsdefend import __version__
from gsdefend.core.config import config
from gsdefend.core.errors import (
    ConfigurationError,
    DimensionMismatchError,
    MissingArtifactError,
    NonFiniteError,
    ParseError,
)
from gsdefend.core.models import CONFIG_MODEL_NAMES, CommandArgs, TrainMode
from gsdefend.harness.commands import COMMANDS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_SCHEMA = 4
EXIT_CONFIG = 5
EXIT_DIVERGED = 6


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsdefend",
        description="Gaussian-splatting poisoning attack and spectral defense benchmark",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=list(COMMANDS), help="Pipeline step to run")
    parser.add_argument("--config", "-c", type=Path, default=None, help="key = value config file for the step")
    parser.add_argument("--seed", "-s", type=int, default=None, help="Seed (gen default: 1; train default: bundle seed)")
    parser.add_argument(
        "--out", "-o", type=Path, default=None, help=f"Experiment directory (default: {config.experiment_root})"
    )
    parser.add_argument("--mode", "-m", choices=[m.value for m in TrainMode], default=None, help="Training mode")
    return parser


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, MissingArtifactError | FileNotFoundError):
        return EXIT_MISSING
    if isinstance(exc, ValidationError):
        return EXIT_CONFIG if exc.title in CONFIG_MODEL_NAMES else EXIT_SCHEMA
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(exc, ParseError | DimensionMismatchError | json.JSONDecodeError):
        return EXIT_SCHEMA
    if isinstance(exc, NonFiniteError):
        return EXIT_DIVERGED
    return EXIT_UNEXPECTED


def _report_error(exc: BaseException, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("offset", "view_index", "dump_path"):
        if hasattr(exc, attr):
            payload[attr] = getattr(exc, attr)
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    """
    CLI entry point.

    Returns:
        Process exit code (0 ok, 1 unexpected, 2 usage, 3 missing artifact, 4 schema/parse,
        5 config, 6 numerical divergence)
    """
    parser = build_parser()
    parsed = parser.parse_args(argv)
    logging.basicConfig(level=config.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    args = CommandArgs(
        command=parsed.command,
        config=parsed.config,
        seed=parsed.seed,
        out=parsed.out or Path(config.experiment_root),
        mode=parsed.mode,
    )
    try:
        COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001
        code = exit_code_for(exc)
        if code == EXIT_UNEXPECTED:
            logger.exception(f"{args.command} failed")
        return _report_error(exc, code)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
