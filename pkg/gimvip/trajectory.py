"""
Trajectory store for continuous and discrete runs.

Samples are kept in order of strictly increasing time (or iteration index) and
round-trip through the trajectory CSV format:
``t,w_0,...,w_{d-1},xi_norm,V`` with 17 significant digits.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import ProblemLoadError
from .utils import format_real

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrajectorySample:
    """One retained state: time or iteration index, state, residual norm and V."""

    t: float
    w: np.ndarray
    xi_norm: float
    v_lyap: Optional[float] = None


@dataclass
class Trajectory:
    """Ordered samples of one run plus its settling information."""

    samples: List[TrajectorySample] = field(default_factory=list)
    settled_at: Optional[float] = None
    regime: Dict[str, Any] = field(default_factory=dict)
    horizon: Optional[float] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def append(self, sample: TrajectorySample) -> None:
        if self.samples and not sample.t > self.samples[-1].t:
            raise ValueError(
                f"Trajectory times must increase: {sample.t} after {self.samples[-1].t}"
            )
        self.samples.append(sample)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[TrajectorySample]:
        return iter(self.samples)

    @property
    def dimension(self) -> int:
        return int(self.samples[0].w.shape[0]) if self.samples else 0

    @property
    def final(self) -> TrajectorySample:
        return self.samples[-1]

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples], dtype=float)

    def states(self) -> np.ndarray:
        return np.array([s.w for s in self.samples], dtype=float)

    def xi_norms(self) -> np.ndarray:
        return np.array([s.xi_norm for s in self.samples], dtype=float)

    def with_lyapunov(self, wbar: Union[Sequence[float], np.ndarray]) -> "Trajectory":
        """Copy with V = 0.5 * ||w - wbar||^2 filled in on every sample."""
        center = np.asarray(wbar, dtype=float)
        samples = [
            replace(s, v_lyap=0.5 * float(np.sum((s.w - center) ** 2))) for s in self.samples
        ]
        return Trajectory(
            samples=samples,
            settled_at=self.settled_at,
            regime=dict(self.regime),
            horizon=self.horizon,
            diagnostics=dict(self.diagnostics),
        )

    # CSV codec

    def header(self) -> List[str]:
        return ["t", *[f"w_{i}" for i in range(self.dimension)], "xi_norm", "V"]

    def rows(self) -> Iterator[List[str]]:
        for s in self.samples:
            yield [
                format_real(s.t),
                *[format_real(float(x)) for x in s.w],
                format_real(s.xi_norm),
                "" if s.v_lyap is None else format_real(s.v_lyap),
            ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header())
        writer.writerows(self.rows())
        return buffer.getvalue()

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        logger.info(f"Wrote {len(self.samples)} samples to {path}")
        return path


def _parse_header(header: Sequence[str]) -> Tuple[int, bool]:
    if len(header) < 3 or header[0] != "t" or "xi_norm" not in header:
        raise ProblemLoadError(f"Malformed trajectory header: {','.join(header)}")
    has_v = header[-1] == "V"
    d = len(header) - (3 if has_v else 2)
    expected = [f"w_{i}" for i in range(d)]
    if list(header[1 : 1 + d]) != expected:
        raise ProblemLoadError(f"Malformed trajectory header: {','.join(header)}")
    return d, has_v


def parse_csv(text: str) -> Trajectory:
    """Parse trajectory CSV text; raises ProblemLoadError when malformed or empty."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ProblemLoadError("Empty trajectory CSV")
    d, has_v = _parse_header(header)
    traj = Trajectory()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ProblemLoadError(f"Row {lineno} has {len(row)} fields, expected {len(header)}")
        try:
            values = [float(x) if x != "" else math.nan for x in row]
        except ValueError as e:
            raise ProblemLoadError(f"Row {lineno}: {e}")
        v_lyap = values[-1] if has_v and not math.isnan(values[-1]) else None
        try:
            traj.append(
                TrajectorySample(
                    t=values[0],
                    w=np.array(values[1 : 1 + d]),
                    xi_norm=values[1 + d],
                    v_lyap=v_lyap,
                )
            )
        except ValueError as e:
            raise ProblemLoadError(f"Row {lineno}: {e}")
    if not traj.samples:
        raise ProblemLoadError("Trajectory CSV has no samples")
    return traj


def read_csv(path: Union[str, Path]) -> Trajectory:
    return parse_csv(Path(path).read_text(encoding="utf-8"))
