__all__ = [
    "define_certify_command",
]

import argparse
import logging

from ..adapter import RunManifest, SolverAdapter, broadcast_w0
from ..exceptions import EXIT_OK, EXIT_VERDICT_FAILURE
from .options import (
    add_output_args,
    add_problem_args,
    add_sampling_args,
    emit,
    parse_vector,
    problem_source,
)

logger = logging.getLogger(__name__)


def define_certify_command(subparsers: argparse._SubParsersAction) -> None:
    """Define the ``certify`` sub-command."""
    parser = subparsers.add_parser(
        "certify",
        help="Compute the reference solution and sample the residual inequalities",
        description="""Solve for the reference solution and check, on random points around it, the
Lipschitz bound of Xi, the contraction of B and the two-sided residual and
correlation bounds with the contraction modulus m.

Writes certificate.json. Exits 1 when a non-informational check fails.

Examples:
  gimvip certify --builtin example1
  gimvip certify --builtin example1 --point 12
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_problem_args(parser)
    add_output_args(parser)
    add_sampling_args(parser)
    parser.add_argument(
        "--point",
        action="append",
        default=[],
        metavar="W",
        help="Extra comma-separated point to include in the checks; repeatable",
    )

    async def certify(args: argparse.Namespace, adapter: SolverAdapter) -> int:
        source = problem_source(args)
        problem = await adapter.load(source)
        points = [broadcast_w0(problem, parse_vector(text)) for text in args.point]
        constants = await adapter.checked_constants(problem, args.samples, args.radius)
        adapter.write_manifest(
            RunManifest(
                command="certify",
                problem=source,
                config={
                    "samples": args.samples,
                    "radius": args.radius,
                    "points": [p.tolist() for p in points],
                },
                outputs={"certificate": "certificate.json"},
                seed=args.seed,
            )
        )
        document = await adapter.certify(problem, constants, args.samples, args.radius, points)
        emit(
            {
                "command": "certify",
                "passed": document["passed"],
                "reference_solution": document["reference_solution"],
                "failed": [c["name"] for c in document["checks"] if not c["pass"]],
            }
        )
        for check in document["checks"]:
            if check["informational"] and not check["pass"]:
                logger.warning(
                    f"Informational check {check['name']} violated by {check['worst_violation']}"
                )
        return EXIT_OK if document["passed"] else EXIT_VERDICT_FAILURE

    parser.set_defaults(handler=certify)
