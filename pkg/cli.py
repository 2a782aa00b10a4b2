"""Command-line entry point: `python cli.py <command> [options]`."""
import argparse
import logging
import sys

from commands import EXIT_USAGE, CommandHandler
from config import TOOL_VERSION, settings

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    """Bad command-line usage."""


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises instead of exiting with status 2."""

    def error(self, message: str):
        raise UsageError(message)


def _add_search_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=int, default=None, help="points per simplex axis")
    parser.add_argument("--refine", type=int, default=None, help="refinement rounds")
    parser.add_argument("--out", default=None, help="report path (stdout when omitted)")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="marton-bc",
        description="Sum rates and inequality checks for binary-input broadcast channels",
    )
    parser.add_argument("--version", action="version", version=TOOL_VERSION)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    verify = sub.add_parser("verify", help="verify the inequality on one channel")
    verify.add_argument("--channel", required=True, help="channel JSON file or name")
    verify.add_argument("--csv", default=None, help="optional per-gate margin table")
    _add_search_options(verify)

    sumrate = sub.add_parser("sumrate", help="R-TD, Marton and outer-bound sum rates")
    sumrate.add_argument("--channel", required=True)
    _add_search_options(sumrate)

    hunt = sub.add_parser("hunt", help="verify a batch of seeded random channels")
    hunt.add_argument("--trials", type=int, default=100)
    hunt.add_argument("--seed", type=int, default=0)
    hunt.add_argument("--ny", type=int, default=2)
    hunt.add_argument("--nz", type=int, default=2)
    _add_search_options(hunt)

    counter = sub.add_parser("counterexample", help="search for a violation when |X| >= 3")
    counter.add_argument("--channel", default="blackwell")
    _add_search_options(counter)

    stationarity = sub.add_parser("stationarity", help="stationary-point certificates")
    stationarity.add_argument("--channel", required=True)
    stationarity.add_argument("--gate", choices=("and", "xor"), default="and")
    stationarity.add_argument("--points", type=int, default=None, help="P(X) grid points")
    _add_search_options(stationarity)
    return parser


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def main(argv: list[str] | None = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        logger.error(f"❌ {e}")
        return EXIT_USAGE
    return CommandHandler().execute(args)


if __name__ == "__main__":
    sys.exit(main())
