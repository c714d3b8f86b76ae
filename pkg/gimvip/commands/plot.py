__all__ = [
    "define_plot_command",
]

import argparse
import logging

from ..adapter import SolverAdapter
from ..exceptions import EXIT_OK
from .options import emit

logger = logging.getLogger(__name__)


def define_plot_command(subparsers: argparse._SubParsersAction) -> None:
    """Define the ``plot`` sub-command."""
    parser = subparsers.add_parser(
        "plot",
        help="Render a trajectory CSV as a log-scale SVG chart",
        description="""Plot xi_norm (and V when present) against the first column of a trajectory
CSV.

Example:
  gimvip plot out/trajectory.csv out/trajectory.svg
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("csv", help="Trajectory CSV written by simulate or solve")
    parser.add_argument("output", help="SVG file to write")

    async def plot(args: argparse.Namespace, adapter: SolverAdapter) -> int:
        path = await adapter.plot(args.csv, args.output)
        emit({"command": "plot", "output": str(path)})
        return EXIT_OK

    parser.set_defaults(handler=plot)
