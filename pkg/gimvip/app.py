"""
Command-line application for the gimvip solver.

Builds the argument parser from the sub-command definitions, configures logging,
dispatches to the selected command and maps failures to exit codes.
"""

import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from . import __version__
from .adapter import SolverAdapter
from .commands import (
    define_bench_command,
    define_certify_command,
    define_plot_command,
    define_simulate_command,
    define_solve_command,
    define_validate_command,
)
from .exceptions import EXIT_INPUT_ERROR, EXIT_NUMERICAL_FAILURE, GimvipError
from .utils import extract_error_message, safe_json_dumps

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class GimvipApp:
    """The ``gimvip`` command-line application."""

    name = "gimvip"
    description = (
        "Solver and settling-time certification for generalized inverse mixed "
        "variational inequalities"
    )

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=self.name, description=self.description)
        parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        parser.add_argument(
            "--log-level",
            default="WARNING",
            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            help="Log level for messages on stderr (default: WARNING)",
        )
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

        define_validate_command(subparsers)
        define_simulate_command(subparsers)
        define_solve_command(subparsers)
        define_certify_command(subparsers)
        define_bench_command(subparsers)
        define_plot_command(subparsers)
        return parser

    def configure_logging(self, level: str) -> None:
        logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, force=True)

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parse ``argv``, run the command and return its exit code."""
        parser = self.build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            # argparse exits 2 on usage errors and 0 for --help/--version
            return int(e.code or 0)
        self.configure_logging(args.log_level)

        adapter = SolverAdapter(
            out_dir=getattr(args, "out_dir", "."), seed=getattr(args, "seed", 0)
        )
        logger.info(f"Running {args.command}")
        try:
            code = asyncio.run(args.handler(args, adapter))
        except GimvipError as e:
            logger.error(f"{args.command} failed: {e.message}")
            document = {"error": e.error_data.model_dump()}
            print(safe_json_dumps(document, indent=None), file=sys.stderr)
            return e.code
        except (OSError, ValueError) as e:
            logger.error(f"{args.command} failed: {extract_error_message(e)}")
            return EXIT_INPUT_ERROR
        except Exception as e:
            logger.error(f"{args.command} failed with an unexpected error: {e}", exc_info=True)
            return EXIT_NUMERICAL_FAILURE
        logger.info(f"{args.command} finished with exit code {code}")
        return code
