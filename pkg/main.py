"""Command-line entry point: ``python main.py [-v] <command> [options]``.

Exit codes: 0 success, 1 check or analysis failure, 2 configuration or usage
error, 3 budget exceeded, 4 I/O failure.
"""
import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from cointoss import settings
from cointoss.commands import (checks, common_parser, construction, overrides_from, reweight,
                               sampling, spectra)
from cointoss.config import load_config
from cointoss.errors import CointossError, ConfigError


logger = logging.getLogger(__name__)

COMMAND_MODULES = (spectra, reweight, construction, sampling, checks)


class StderrHandler(logging.StreamHandler):
    """Writes to whatever sys.stderr is when a record is emitted."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cointoss",
        description="L^q spectra, Gibbs reweighting and phase transitions of "
                    "inhomogeneous Bernoulli products.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    common = common_parser()
    for module in COMMAND_MODULES:
        module.register(subparsers, common)
    return parser


def configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.LOG_LEVEL, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        handlers=[StderrHandler()], force=True)


def cli_dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 after --help
        return 0 if exc.code in (0, None) else ConfigError.exit_code

    configure_logging(args.verbose)
    config = None
    try:
        config = load_config(args.config, overrides_from(args))
        try:
            result = args.handler(args, config)
        except ValidationError as exc:
            raise ConfigError(f"Invalid input: {exc}") from exc
    except CointossError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"{args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = exc.exit_code
        if args.record and config is not None:
            _record(args.command, config, status, str(exc))
        return status
    except OSError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"{args.command}: I/O error: {exc}", file=sys.stderr)
        return 4

    # With no output file the data went to stdout; keep the summary apart from it.
    print(result.summary, file=sys.stdout if config.output else sys.stderr)
    if args.record:
        _record(args.command, config, result.exit_status, result.summary,
                result.artifact, result.report)
    return result.exit_status


def _record(command, config, status, summary, artifact=None, report=None) -> None:
    from cointoss import archive

    try:
        run_id = archive.record_run(command, config, status, summary, artifact, report)
    except CointossError as exc:
        logger.error("%s", exc)
        return
    print(f"archived as run {run_id}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(cli_dispatch())
