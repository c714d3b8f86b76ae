__all__ = [
    "define_validate_command",
]

import argparse
import logging

from ..adapter import RunManifest, SolverAdapter
from ..exceptions import EXIT_OK, EXIT_VERDICT_FAILURE, ConfigError
from ..utils import parse_override
from .options import add_output_args, add_problem_args, add_sampling_args, emit, problem_source

logger = logging.getLogger(__name__)


def define_validate_command(subparsers: argparse._SubParsersAction) -> None:
    """Define the ``validate`` sub-command."""
    parser = subparsers.add_parser(
        "validate",
        help="Compute the problem constants and check the standing assumptions",
        description="""Compute alpha, lambda, mu, rho, beta and sigma (exactly for affine F and h,
by sampling otherwise), derive Gamma, Lambda and m, and check the assumption.

Writes constants.json. Exits 0 when every condition passes, 1 otherwise.

Examples:
  gimvip validate --builtin example1
  gimvip validate --builtin example1 --override alpha=10
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_problem_args(parser)
    add_output_args(parser)
    add_sampling_args(parser)
    parser.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Replace a constant (alpha, lambda, mu, rho, beta, sigma); repeatable",
    )

    async def validate(args: argparse.Namespace, adapter: SolverAdapter) -> int:
        try:
            overrides = dict(parse_override(item) for item in args.override)
        except ValueError as e:
            raise ConfigError(str(e))
        source = problem_source(args)
        problem = await adapter.load(source)
        adapter.write_manifest(
            RunManifest(
                command="validate",
                problem=source,
                config={"overrides": overrides, "samples": args.samples, "radius": args.radius},
                outputs={"constants": "constants.json"},
                seed=args.seed,
            )
        )
        document = await adapter.validate(problem, overrides, args.samples, args.radius)
        verdict = document["verdict"]
        emit(
            {
                "command": "validate",
                "passed": verdict["passed"],
                "cond_iii_lhs": verdict["cond_iii_lhs"],
                "m": document["m"],
            }
        )
        if not verdict["passed"]:
            logger.info(f"Standing assumptions not satisfied: {verdict}")
            return EXIT_VERDICT_FAILURE
        return EXIT_OK

    parser.set_defaults(handler=validate)
