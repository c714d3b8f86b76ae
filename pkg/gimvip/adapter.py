"""
Solver adapter between the command-line surface and the numerical modules.

Commands parse their flags into configuration models and call one async method
here. Each method runs the blocking numerics in a worker thread, writes its
artifacts into the output directory and returns a summary document.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .certify import (
    CertificateReport,
    check_lemma_bdt,
    discrete_certificate,
    flow_certificate,
    predefined_gd,
    reference_solution,
)
from .exceptions import ConfigError, InvalidConstantsError, ProblemLoadError
from .flow import FixedTimeParams, FixedTimeRegime, IntegratorConfig, integrate
from .iterate import run as run_method
from .model import ProblemInstance, load_builtin, load_problem_file
from .plotting import trajectory_svg, write_svg
from .regimes import (
    AssumptionVerdict,
    ConstantsReport,
    check_assumption_a,
    constants_for,
    report_document,
    with_overrides,
)
from .trajectory import Trajectory, read_csv
from .utils import write_json

logger = logging.getLogger(__name__)

REFERENCE_TOL = 1e-12


class ProblemSource(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    path: Optional[str] = None
    builtin: Optional[str] = None


class RunManifest(BaseModel):
    """Everything needed to reproduce one command invocation."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Literal["validate", "simulate", "solve", "certify", "bench", "plot"]
    problem: Optional[ProblemSource] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    integrator: Optional[Dict[str, Any]] = None
    outputs: Dict[str, str] = Field(default_factory=dict)
    seed: int = 0


@dataclass
class RunResult:
    """Outcome of a simulate or solve run."""

    trajectory: Trajectory
    certificate: CertificateReport
    outputs: Dict[str, str] = field(default_factory=dict)

    def summary(self) -> Dict[str, Any]:
        final = self.trajectory.final
        return {
            "settled": self.trajectory.settled_at is not None,
            "observed": self.certificate.observed,
            "predicted_bound": self.certificate.predicted_bound,
            "bound_respected": self.certificate.bound_respected,
            "final_w": final.w.tolist(),
            "final_xi_norm": final.xi_norm,
            "samples": len(self.trajectory),
            "outputs": self.outputs,
        }


def ensure_out_dir(path: Union[str, Path]) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"Output directory is not writable: {out} ({e})")
    return out


def resolve_problem(source: ProblemSource) -> ProblemInstance:
    if source.builtin is not None:
        return load_builtin(source.builtin)
    if source.path is None:
        raise ProblemLoadError("Either a problem path or a builtin name is required")
    path = Path(source.path)
    if not path.is_file():
        raise ProblemLoadError(f"Problem file not found: {path}", data={"field": "path"})
    return load_problem_file(path)


def broadcast_w0(p: ProblemInstance, w0: Sequence[float]) -> np.ndarray:
    """A single value fills every coordinate."""
    values = np.asarray(list(w0), dtype=float)
    if values.size == 1:
        return np.full(p.d, float(values[0]))
    if values.size != p.d:
        raise ConfigError(f"w0 has {values.size} entries, problem dimension is {p.d}")
    return values


def auto_gd(params: FixedTimeParams, r: ConstantsReport) -> FixedTimeParams:
    """Replace Gd with the predefined-time gain so the flow settles within Td."""
    if params.k3 != 0:
        raise ConfigError("--auto-gd requires k3 = 0")
    if params.a3 <= 0:
        raise ConfigError("--auto-gd requires a3 > 0")
    if r.m is None or r.gamma_const is None or r.m <= 0:
        raise ConfigError("--auto-gd requires constants with a positive contraction modulus")
    gd = predefined_gd(params.a1, params.a2, params.a3, params.k1, params.k2, r.m, r.gamma_const)
    logger.info(f"Predefined-time gain Gd = {gd:.6g} for Td = {params.Td}")
    return params.model_copy(update={"Gd": gd})


class SolverAdapter:
    """Async facade over the solver modules used by every command."""

    def __init__(self, out_dir: Union[str, Path] = ".", seed: int = 0):
        self.out_dir = Path(out_dir)
        self.seed = seed
        logger.debug(f"Solver adapter initialized (out_dir={self.out_dir}, seed={seed})")

    def _path(self, name: str, subdir: Optional[str] = None) -> Path:
        base = ensure_out_dir(self.out_dir if subdir is None else self.out_dir / subdir)
        return base / name

    def write_manifest(self, manifest: RunManifest, subdir: Optional[str] = None) -> Path:
        return write_json(self._path("manifest.json", subdir), manifest.model_dump(mode="json"))

    # Problem and constants

    async def load(self, source: ProblemSource) -> ProblemInstance:
        return await asyncio.to_thread(resolve_problem, source)

    async def constants(
        self,
        p: ProblemInstance,
        overrides: Optional[Mapping[str, float]] = None,
        n_samples: int = 10_000,
        radius: float = 100.0,
    ) -> ConstantsReport:
        report = await asyncio.to_thread(
            constants_for, p, n_samples=n_samples, radius=radius, seed=self.seed
        )
        if overrides:
            report = with_overrides(report, overrides)
        return report

    async def checked_constants(
        self, p: ProblemInstance, n_samples: int = 10_000, radius: float = 100.0
    ) -> ConstantsReport:
        """Constants that must pass the verdict before a run is attempted."""
        report = await self.constants(p, n_samples=n_samples, radius=radius)
        verdict = check_assumption_a(report)
        if not verdict.passed:
            raise InvalidConstantsError(
                "Problem does not satisfy the standing assumptions",
                data=report_document(report, verdict),
            )
        return report

    async def validate(
        self,
        p: ProblemInstance,
        overrides: Optional[Mapping[str, float]] = None,
        n_samples: int = 10_000,
        radius: float = 100.0,
    ) -> Dict[str, Any]:
        """Constants report plus verdict, written to constants.json."""
        report = await self.constants(p, overrides, n_samples, radius)
        verdict: AssumptionVerdict = check_assumption_a(report)
        document = report_document(report, verdict)
        write_json(self._path("constants.json"), document)
        return document

    async def _reference(self, p: ProblemInstance, r: ConstantsReport) -> np.ndarray:
        return await asyncio.to_thread(reference_solution, p, r, REFERENCE_TOL)

    # Runs

    async def simulate(
        self,
        p: ProblemInstance,
        regime: Any,
        ic: IntegratorConfig,
        w0: np.ndarray,
        r: ConstantsReport,
        subdir: Optional[str] = None,
    ) -> RunResult:
        """Integrate, certify and write trajectory.csv and report.json."""
        wbar = await self._reference(p, r)
        traj = await asyncio.to_thread(integrate, p, regime, w0, ic, r)
        traj = traj.with_lyapunov(wbar)
        cert = await asyncio.to_thread(flow_certificate, p, regime, traj, r, wbar, ic.settle_tol)
        outputs = {
            "trajectory": str(traj.write_csv(self._path("trajectory.csv", subdir))),
            "report": str(write_json(self._path("report.json", subdir), cert.document())),
        }
        return RunResult(trajectory=traj, certificate=cert, outputs=outputs)

    async def solve(
        self,
        p: ProblemInstance,
        method: Any,
        w0: np.ndarray,
        r: ConstantsReport,
        eps: float = 1e-2,
        subdir: Optional[str] = None,
        svg: bool = False,
    ) -> RunResult:
        """Iterate, certify and write trajectory.csv and report.json (plus an SVG chart)."""
        wbar = await self._reference(p, r)
        traj = await asyncio.to_thread(run_method, p, method, w0, wbar)
        traj = traj.with_lyapunov(wbar)
        cert = await asyncio.to_thread(discrete_certificate, p, method, traj, r, wbar, eps)
        outputs = {
            "trajectory": str(traj.write_csv(self._path("trajectory.csv", subdir))),
            "report": str(write_json(self._path("report.json", subdir), cert.document())),
        }
        if svg:
            outputs["svg"] = str(
                write_svg(self._path("trajectory.svg", subdir), trajectory_svg(traj, method.kind))
            )
        return RunResult(trajectory=traj, certificate=cert, outputs=outputs)

    async def certify(
        self,
        p: ProblemInstance,
        r: ConstantsReport,
        n_samples: int = 10_000,
        radius: float = 100.0,
        points: Sequence[Sequence[float]] = (),
    ) -> Dict[str, Any]:
        """Reference solution plus the residual inequality harness, written to certificate.json."""
        wbar = await self._reference(p, r)
        checks = await asyncio.to_thread(
            check_lemma_bdt, p, r, wbar, n_samples, radius, self.seed, points
        )
        document = {
            "reference_solution": wbar.tolist(),
            "checks": [c.document() for c in checks],
            "passed": all(c.passed for c in checks if not c.informational),
            "constants_used": report_document(r),
        }
        write_json(self._path("certificate.json"), document)
        return document

    async def run_all(self, jobs: Sequence[Any]) -> List[Any]:
        """Await independent jobs concurrently; results keep the order of ``jobs``."""
        return list(await asyncio.gather(*jobs))

    async def plot(self, csv_path: Union[str, Path], svg_path: Union[str, Path]) -> Path:
        traj = await asyncio.to_thread(read_csv, csv_path)
        return write_svg(svg_path, trajectory_svg(traj, Path(csv_path).name))


def fixed_regime(params: FixedTimeParams) -> FixedTimeRegime:
    return FixedTimeRegime(**params.model_dump())
