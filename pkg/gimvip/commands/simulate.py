__all__ = [
    "define_simulate_command",
]

import argparse
import logging
from typing import Any

from ..adapter import RunManifest, SolverAdapter, auto_gd, broadcast_w0, fixed_regime
from ..exceptions import EXIT_OK, EXIT_VERDICT_FAILURE
from ..flow import FiniteTimeRegime, IntegratorConfig, IntegratorScheme, NominalRegime
from ..regimes import ConstantsReport
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


def default_dt(t_max: float) -> float:
    return min(1e-3, t_max / 10.0)


def build_regime(args: argparse.Namespace, constants: ConstantsReport) -> Any:
    if args.regime == "nominal":
        return build_config(NominalRegime, kappa=args.kappa)
    if args.regime == "finite":
        return build_config(FiniteTimeRegime, tau=args.tau, k=args.k)
    params = fixed_time_params(args)
    if args.auto_gd:
        params = auto_gd(params, constants)
    return fixed_regime(params)


def build_integrator(args: argparse.Namespace) -> IntegratorConfig:
    return build_config(
        IntegratorConfig,
        scheme=args.scheme,
        dt=args.dt if args.dt is not None else default_dt(args.t_max),
        t_max=args.t_max,
        settle_tol=args.settle_tol,
        sample_stride=args.sample_stride,
    )


def define_simulate_command(subparsers: argparse._SubParsersAction) -> None:
    """Define the ``simulate`` sub-command."""
    parser = subparsers.add_parser(
        "simulate",
        help="Integrate a continuous-time regime and certify its settling time",
        description="""Integrate the nominal, finite-time or fixed-time dynamics from w0 and compare
the observed settling time with the predicted bound.

Writes trajectory.csv, report.json and manifest.json. Exits 1 when the bound is
violated; a run that does not settle before --t-max only logs a warning.

Examples:
  gimvip simulate --builtin example1 --regime finite --tau 1 --k 3 --w0 50
  gimvip simulate --builtin example1 --regime fixed --k3 0 --Td 1 --auto-gd
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_problem_args(parser)
    add_output_args(parser)
    add_sampling_args(parser)
    add_w0_arg(parser)
    parser.add_argument("--regime", choices=["nominal", "finite", "fixed"], default="finite")
    parser.add_argument("--kappa", type=float, default=1.0, help="Nominal gain")
    parser.add_argument("--tau", type=float, default=1.0, help="Finite-time gain")
    parser.add_argument("--k", type=float, default=3.0, help="Finite-time exponent (k > 2)")
    add_fixed_time_args(parser)
    integration = parser.add_argument_group("integration")
    integration.add_argument(
        "--scheme",
        choices=[s.value for s in IntegratorScheme],
        default=IntegratorScheme.RK4_FIXED.value,
    )
    integration.add_argument(
        "--dt", type=float, default=None, help="Step (default: min(1e-3, t_max/10))"
    )
    integration.add_argument("--t-max", type=float, default=100.0)
    integration.add_argument("--settle-tol", type=float, default=1e-9)
    integration.add_argument("--sample-stride", type=int, default=1)

    async def simulate(args: argparse.Namespace, adapter: SolverAdapter) -> int:
        integrator = build_integrator(args)
        source = problem_source(args)
        problem = await adapter.load(source)
        w0 = broadcast_w0(problem, parse_vector(args.w0))
        constants = await adapter.checked_constants(problem, args.samples, args.radius)
        regime = build_regime(args, constants)
        adapter.write_manifest(
            RunManifest(
                command="simulate",
                problem=source,
                config={"regime": regime.model_dump(mode="json"), "w0": w0.tolist()},
                integrator=integrator.model_dump(mode="json"),
                outputs={"trajectory": "trajectory.csv", "report": "report.json"},
                seed=args.seed,
            )
        )
        result = await adapter.simulate(problem, regime, integrator, w0, constants)
        emit({"command": "simulate", **result.summary()})
        if result.trajectory.settled_at is None:
            logger.warning(
                f"Run did not settle within t_max={integrator.t_max} "
                f"(final ||Xi|| = {result.trajectory.final.xi_norm:.3g})"
            )
        if not result.certificate.bound_respected:
            return EXIT_VERDICT_FAILURE
        return EXIT_OK

    parser.set_defaults(handler=simulate)
