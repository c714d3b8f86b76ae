__all__ = [
    "define_solve_command",
]

import argparse
import logging
from typing import Any

from ..adapter import RunManifest, SolverAdapter, broadcast_w0
from ..exceptions import EXIT_OK, EXIT_VERDICT_FAILURE
from ..iterate import (
    Alg1Method,
    Alg2Method,
    ConstantSchedule,
    Eq29Method,
    HarmonicSchedule,
    NominalIterMethod,
)
from ..utils import build_config
from .options import (
    add_fixed_time_args,
    add_output_args,
    add_problem_args,
    add_sampling_args,
    add_w0_arg,
    emit,
    fixed_time_params,
    parse_vector,
    problem_source,
)

logger = logging.getLogger(__name__)

ALG2_DEFAULT_THETA = 0.2
CONSTANT_DEFAULT_THETA = 1e-3
# both names select theta_n = theta_min + 1/n
HARMONIC_SCHEDULE_NAMES = ("paper", "harmonic")


def build_schedule(args: argparse.Namespace) -> Any:
    if args.schedule in HARMONIC_SCHEDULE_NAMES:
        return build_config(HarmonicSchedule, theta_min=args.theta_min)
    theta = args.theta if args.theta is not None else CONSTANT_DEFAULT_THETA
    return build_config(ConstantSchedule, theta=theta)


def build_method(args: argparse.Namespace) -> Any:
    common = {"n_max": args.iters, "stop_tol": args.stop_tol}
    if args.method == "alg2":
        theta = args.theta if args.theta is not None else ALG2_DEFAULT_THETA
        return build_config(Alg2Method, tau=args.tau, theta=theta, k=args.k, **common)
    if args.method == "alg1":
        return build_config(
            Alg1Method, tau=args.tau, k=args.k, schedule=build_schedule(args), **common
        )
    if args.method == "eq29":
        if args.auto_gd:
            logger.warning("--auto-gd only applies to simulate; ignored")
        return build_config(
            Eq29Method, schedule=build_schedule(args), params=fixed_time_params(args), **common
        )
    return build_config(NominalIterMethod, kappa_theta=args.kappa_theta, **common)


def define_solve_command(subparsers: argparse._SubParsersAction) -> None:
    """Define the ``solve`` sub-command."""
    parser = subparsers.add_parser(
        "solve",
        help="Run a discrete solver and certify its iterates",
        description="""Iterate a forward discretization from w0 until ||Xi|| <= --stop-tol or
--iters iterations, then compare against the discrete envelope where one applies.

Writes trajectory.csv (first column: iteration), report.json and manifest.json.

Examples:
  gimvip solve --builtin example1 --method eq29 --k3 1 --iters 150 --schedule paper
  gimvip solve --builtin example1 --method alg2 --k 2 --theta 0.2 --iters 150
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_problem_args(parser)
    add_output_args(parser)
    add_sampling_args(parser)
    add_w0_arg(parser)
    parser.add_argument(
        "--method", choices=["alg2", "alg1", "eq29", "nominal"], default="eq29"
    )
    parser.add_argument("--tau", type=float, default=1.0)
    parser.add_argument("--k", type=float, default=2.0, help="Exponent (k >= 2)")
    parser.add_argument(
        "--theta", type=float, default=None, help="Step for alg2 and the constant schedule"
    )
    parser.add_argument(
        "--schedule", choices=[*HARMONIC_SCHEDULE_NAMES, "constant"], default="paper"
    )
    parser.add_argument(
        "--theta-min", type=float, default=1e-4, help="theta_n = theta_min + 1/n"
    )
    parser.add_argument("--kappa-theta", type=float, default=0.5, help="Nominal iteration step")
    parser.add_argument("--iters", type=int, default=150)
    parser.add_argument("--stop-tol", type=float, default=1e-12)
    parser.add_argument(
        "--eps", type=float, default=1e-2, help="Target distance for the discrete envelope"
    )
    add_fixed_time_args(parser)

    async def solve(args: argparse.Namespace, adapter: SolverAdapter) -> int:
        method = build_method(args)
        source = problem_source(args)
        problem = await adapter.load(source)
        w0 = broadcast_w0(problem, parse_vector(args.w0))
        constants = await adapter.checked_constants(problem, args.samples, args.radius)
        adapter.write_manifest(
            RunManifest(
                command="solve",
                problem=source,
                config={
                    "method": method.model_dump(mode="json"),
                    "w0": w0.tolist(),
                    "eps": args.eps,
                },
                outputs={"trajectory": "trajectory.csv", "report": "report.json"},
                seed=args.seed,
            )
        )
        result = await adapter.solve(problem, method, w0, constants, eps=args.eps)
        emit({"command": "solve", **result.summary()})
        if result.trajectory.settled_at is None:
            logger.warning(
                f"Stopped after {method.n_max} iterations with "
                f"||Xi|| = {result.trajectory.final.xi_norm:.3g} > {method.stop_tol}"
            )
        if not result.certificate.bound_respected:
            return EXIT_VERDICT_FAILURE
        return EXIT_OK

    parser.set_defaults(handler=solve)
