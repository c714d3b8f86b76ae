"""Flag groups and helpers shared by the sub-commands."""

import argparse
import logging
from typing import Any, Dict, List

from ..adapter import ProblemSource
from ..exceptions import ConfigError
from ..flow import FixedTimeParams
from ..utils import build_config, safe_json_dumps

logger = logging.getLogger(__name__)

# gains used by the reference numerical experiment
FIXED_TIME_DEFAULTS: Dict[str, float] = {
    "a1": 0.9,
    "a2": 0.5,
    "a3": 1e-4,
    "k1": 0.4,
    "k2": 1.5,
    "k3": 0.0,
    "Gd": 1.0,
    "Td": 1.0,
}


def add_problem_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--problem", metavar="PATH", help="Problem JSON document")
    group.add_argument("--builtin", metavar="NAME", help="Builtin problem (example1, affine5)")


def add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out-dir", default=".", help="Directory for artifacts (default: .)")
    parser.add_argument("--seed", type=int, default=0, help="Seed for sampled quantities")


def add_sampling_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--samples", type=int, default=10_000, help="Sample pairs for empirical constants"
    )
    parser.add_argument(
        "--radius", type=float, default=100.0, help="Half-width of the sampling box"
    )


def add_fixed_time_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("fixed-time gain")
    for name, default in FIXED_TIME_DEFAULTS.items():
        group.add_argument(f"--{name}", type=float, default=default, help=f"(default: {default})")
    group.add_argument(
        "--auto-gd",
        action="store_true",
        help="Set Gd so that the flow settles within Td (requires k3 = 0)",
    )


def add_w0_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--w0",
        default="50",
        help="Initial point, comma-separated; a single value fills every coordinate",
    )


def problem_source(args: argparse.Namespace) -> ProblemSource:
    return ProblemSource(path=args.problem, builtin=args.builtin)


def parse_vector(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"Not a comma-separated vector: {text!r}")


def fixed_time_params(args: argparse.Namespace, **extra: Any) -> FixedTimeParams:
    values = {name: getattr(args, name) for name in FIXED_TIME_DEFAULTS}
    values.update(extra)
    return build_config(FixedTimeParams, **values)


def emit(summary: Dict[str, Any]) -> None:
    """One-line JSON summary on stdout."""
    print(safe_json_dumps(summary, indent=None))

