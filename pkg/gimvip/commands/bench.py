__all__ = [
    "define_bench_command",
    "BENCHMARKS",
]

import argparse
import csv
import io
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

from ..adapter import RunManifest, SolverAdapter, auto_gd, fixed_regime
from ..exceptions import EXIT_OK, ConfigError
from ..flow import FiniteTimeRegime, FixedTimeParams, IntegratorConfig
from ..iterate import Alg2Method, Eq29Method, HarmonicSchedule
from ..model import ProblemInstance, load_builtin
from ..regimes import ConstantsReport
from ..utils import format_real, write_json
from .options import FIXED_TIME_DEFAULTS, add_output_args, emit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchEntry:
    """One grid point.

    ``paper_reported`` is the final iterate reported in the literature, if any.
    """

    name: str
    kind: str
    config: Callable[[ConstantsReport], Any]
    paper_reported: Optional[float] = None
    integrator: Optional[IntegratorConfig] = None


def _fixed(k3: float) -> FixedTimeParams:
    return FixedTimeParams(**{**FIXED_TIME_DEFAULTS, "k3": k3})


BENCH_W0 = 50.0
BENCH_ITERS = 150
FLOW_INTEGRATOR = IntegratorConfig(dt=1e-3, t_max=100.0, settle_tol=1e-8, sample_stride=10)
FIXED_INTEGRATOR = IntegratorConfig(dt=1e-3, t_max=10.0, settle_tol=1e-8, sample_stride=10)

EXAMPLE1_GRID: List[BenchEntry] = [
    BenchEntry(
        "eq29_k3_1",
        "solve",
        lambda r: Eq29Method(schedule=HarmonicSchedule(), params=_fixed(1.0), n_max=BENCH_ITERS),
        paper_reported=-5.33e-5,
    ),
    BenchEntry(
        "eq29_k3_0",
        "solve",
        lambda r: Eq29Method(schedule=HarmonicSchedule(), params=_fixed(0.0), n_max=BENCH_ITERS),
        paper_reported=-1.13e-4,
    ),
    BenchEntry(
        "alg2_k3",
        "solve",
        lambda r: Alg2Method(tau=1.0, theta=0.2, k=3.0, n_max=BENCH_ITERS),
        paper_reported=2.08,
    ),
    BenchEntry(
        "alg2_k2",
        "solve",
        lambda r: Alg2Method(tau=1.0, theta=0.2, k=2.0, n_max=BENCH_ITERS),
        paper_reported=1.39e-3,
    ),
    BenchEntry(
        "flow_finite",
        "simulate",
        lambda r: FiniteTimeRegime(tau=1.0, k=3.0),
        integrator=FLOW_INTEGRATOR,
    ),
    BenchEntry(
        "flow_fixed",
        "simulate",
        lambda r: fixed_regime(_fixed(0.0)),
        integrator=FIXED_INTEGRATOR,
    ),
    BenchEntry(
        "flow_predefined",
        "simulate",
        lambda r: fixed_regime(auto_gd(_fixed(0.0), r)),
        integrator=FIXED_INTEGRATOR,
    ),
]

BENCHMARKS: Dict[str, List[BenchEntry]] = {"example1": EXAMPLE1_GRID}

TABLE_COLUMNS = [
    "name",
    "kind",
    "final_w",
    "final_xi_norm",
    "observed",
    "predicted_bound",
    "bound_respected",
    "paper_reported",
]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_real(value)
    return str(value)


def table_csv(rows: List[Dict[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for row in rows:
        writer.writerow([_cell(row[col]) for col in TABLE_COLUMNS])
    return buffer.getvalue()


async def run_bench(
    adapter: SolverAdapter,
    problem: ProblemInstance,
    grid: List[BenchEntry],
    constants: ConstantsReport,
) -> List[Dict[str, Any]]:
    """Run every grid entry concurrently; rows come back in grid order."""
    w0 = [BENCH_W0] * problem.d

    async def run_entry(entry: BenchEntry) -> Dict[str, Any]:
        config = entry.config(constants)
        if entry.kind == "solve":
            result = await adapter.solve(
                problem, config, w0, constants, subdir=entry.name, svg=True
            )
        else:
            result = await adapter.simulate(
                problem, config, entry.integrator, w0, constants, subdir=entry.name
            )
        final = result.trajectory.final
        return {
            "name": entry.name,
            "kind": entry.kind,
            "final_w": float(final.w[0]),
            "final_xi_norm": final.xi_norm,
            "observed": result.certificate.observed,
            "predicted_bound": result.certificate.predicted_bound,
            "bound_respected": result.certificate.bound_respected,
            "paper_reported": entry.paper_reported,
        }

    return await adapter.run_all([run_entry(entry) for entry in grid])


def define_bench_command(subparsers: argparse._SubParsersAction) -> None:
    """Define the ``bench`` sub-command."""
    parser = subparsers.add_parser(
        "bench",
        help="Run the reference numerical experiment grid",
        description="""Run every discrete and continuous configuration of a named benchmark and
write a comparison table (bench.csv, bench.json) with one subdirectory of artifacts per
run. The paper_reported column holds final iterates reported in the literature, for
comparison only; it is never asserted.

Example:
  gimvip bench example1 --out-dir bench-out
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("name", help=f"Benchmark name ({', '.join(BENCHMARKS)})")
    add_output_args(parser)

    async def bench(args: argparse.Namespace, adapter: SolverAdapter) -> int:
        grid = BENCHMARKS.get(args.name)
        if grid is None:
            raise ConfigError(
                f"Unknown benchmark: {args.name}", data={"choices": list(BENCHMARKS)}
            )
        problem = load_builtin(args.name)
        constants = await adapter.checked_constants(problem)
        adapter.write_manifest(
            RunManifest(
                command="bench",
                problem={"builtin": args.name},
                config={"entries": [entry.name for entry in grid], "w0": BENCH_W0},
                outputs={"table": "bench.csv", "report": "bench.json"},
                seed=args.seed,
            )
        )
        rows = await run_bench(adapter, problem, grid, constants)
        table = adapter.out_dir / "bench.csv"
        table.write_text(table_csv(rows), encoding="utf-8")
        write_json(adapter.out_dir / "bench.json", {"benchmark": args.name, "rows": rows})
        emit({"command": "bench", "name": args.name, "rows": len(rows), "table": str(table)})
        return EXIT_OK

    parser.set_defaults(handler=bench)
