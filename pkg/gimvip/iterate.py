"""
Discrete-time solvers: forward-Euler discretizations of the flows.

* alg2:          w <- w - tau*theta * Xi(w) / ||Xi(w)||^((k-2)/(k-1))
* alg1:          the same update with a step schedule theta_n
* eq29:          w <- w - theta_n * (Gd/Td) * tau(w) * Xi(w)
* nominal_iter:  w <- w - kappa_theta * Xi(w)

The trajectory's time column holds the iteration index.
"""

import logging
from typing import Annotated, Any, List, Literal, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import NonFiniteStateError
from .flow import DEFAULT_SING_GUARD, FixedTimeParams, tau_gain
from .model import ProblemInstance, as_vector
from .residual import ResidualMap, ResidualSample
from .trajectory import Trajectory, TrajectorySample

logger = logging.getLogger(__name__)


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ConstantSchedule(_Config):
    kind: Literal["constant"] = "constant"
    theta: float = Field(gt=0)

    def theta_at(self, n: int) -> float:
        return self.theta


class HarmonicSchedule(_Config):
    """theta_n = theta_min + 1/n with n counted from 1."""

    kind: Literal["harmonic"] = "harmonic"
    theta_min: float = Field(default=1e-4, ge=0)

    def theta_at(self, n: int) -> float:
        return self.theta_min + 1.0 / n


ThetaSchedule = Annotated[Union[ConstantSchedule, HarmonicSchedule], Field(discriminator="kind")]


class _Method(_Config):
    n_max: int = Field(default=150, ge=0)
    stop_tol: float = Field(default=1e-12, gt=0)
    sing_guard: float = Field(default=DEFAULT_SING_GUARD, gt=0)


class Alg2Method(_Method):
    kind: Literal["alg2"] = "alg2"
    tau: float = Field(default=1.0, gt=0)
    theta: float = Field(default=0.2, gt=0)
    k: float = Field(default=2.0, ge=2)


class Alg1Method(_Method):
    kind: Literal["alg1"] = "alg1"
    tau: float = Field(default=1.0, gt=0)
    k: float = Field(default=2.0, ge=2)
    schedule: ThetaSchedule = Field(default_factory=HarmonicSchedule)


class Eq29Method(_Method):
    kind: Literal["eq29"] = "eq29"
    schedule: ThetaSchedule = Field(default_factory=HarmonicSchedule)
    params: FixedTimeParams


class NominalIterMethod(_Method):
    kind: Literal["nominal_iter"] = "nominal_iter"
    kappa_theta: float = Field(gt=0)


MethodConfig = Annotated[
    Union[Alg2Method, Alg1Method, Eq29Method, NominalIterMethod], Field(discriminator="kind")
]


def _normalized_update(
    sample: ResidualSample, gain: float, k: float, sing_guard: float
) -> np.ndarray:
    if sample.xi_norm <= sing_guard:
        return sample.w.copy()
    exponent = (k - 2.0) / (k - 1.0)
    return sample.w - gain * sample.xi / sample.xi_norm**exponent


def _eq29_update(
    sample: ResidualSample, theta: float, fp: FixedTimeParams, sing_guard: float
) -> np.ndarray:
    if sample.xi_norm <= sing_guard:
        return sample.w.copy()
    gain = theta * (fp.Gd / fp.Td) * tau_gain(fp, sample.xi_norm, sing_guard)
    return sample.w - gain * sample.xi


def step_alg2(
    p: ProblemInstance,
    w: Union[Sequence[float], np.ndarray],
    tau: float,
    theta: float,
    k: float,
    sing_guard: float = DEFAULT_SING_GUARD,
) -> np.ndarray:
    """One fixed-step finite-time update.

    Example 1, w = 50, tau = 1, theta = 0.2: k = 2 -> 43.2, k = 3 -> 50 - 0.2*sqrt(34).
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    sample = ResidualMap(p).evaluate(as_vector(w, p.d))
    return _normalized_update(sample, tau * theta, k, sing_guard)


def step_eq29(
    p: ProblemInstance,
    w: Union[Sequence[float], np.ndarray],
    theta: float,
    fp: FixedTimeParams,
    sing_guard: float = DEFAULT_SING_GUARD,
) -> np.ndarray:
    """One forward-Euler step of the fixed-time flow with step theta."""
    sample = ResidualMap(p).evaluate(as_vector(w, p.d))
    return _eq29_update(sample, theta, fp, sing_guard)


def _advance(mc: Any, sample: ResidualSample, n: int) -> np.ndarray:
    """Iterate n (1-based) from the residual sample at w_{n-1}."""
    if isinstance(mc, Alg2Method):
        return _normalized_update(sample, mc.tau * mc.theta, mc.k, mc.sing_guard)
    if isinstance(mc, Alg1Method):
        return _normalized_update(sample, mc.tau * mc.schedule.theta_at(n), mc.k, mc.sing_guard)
    if isinstance(mc, Eq29Method):
        return _eq29_update(sample, mc.schedule.theta_at(n), mc.params, mc.sing_guard)
    if sample.xi_norm <= mc.sing_guard:
        return sample.w.copy()
    return sample.w - mc.kappa_theta * sample.xi


def run(
    p: ProblemInstance,
    mc: Any,
    w0: Union[Sequence[float], np.ndarray],
    wbar: Optional[Union[Sequence[float], np.ndarray]] = None,
) -> Trajectory:
    """Iterate until ||Xi(w_n)|| <= stop_tol or n = n_max, recording every iterate.

    Args:
        p: Problem instance
        mc: Alg2Method, Alg1Method, Eq29Method or NominalIterMethod
        w0: Initial iterate
        wbar: Optional reference solution; when given, iterations where
            V = 0.5*||w - wbar||^2 increases are recorded in the diagnostics

    Returns:
        Trajectory indexed by iteration number
    """
    rmap = ResidualMap(p)
    w = as_vector(w0, p.d)
    sample = rmap.evaluate(w)
    traj = Trajectory(regime=mc.model_dump(mode="json"), horizon=float(mc.n_max))
    traj.append(TrajectorySample(t=0.0, w=w, xi_norm=sample.xi_norm))

    center = None if wbar is None else as_vector(wbar, p.d)
    increases: List[int] = []
    v_prev = None if center is None else 0.5 * float(np.sum((w - center) ** 2))

    n = 0
    while sample.xi_norm > mc.stop_tol and n < mc.n_max:
        n += 1
        w = _advance(mc, sample, n)
        if not np.all(np.isfinite(w)):
            raise NonFiniteStateError(
                f"Iterate became non-finite at iteration {n}", data={"iteration": n}
            )
        sample = rmap.evaluate(w)
        traj.append(TrajectorySample(t=float(n), w=w, xi_norm=sample.xi_norm))
        if center is not None and v_prev is not None:
            v = 0.5 * float(np.sum((w - center) ** 2))
            if v > v_prev:
                increases.append(n)
            v_prev = v

    if sample.xi_norm <= mc.stop_tol:
        traj.settled_at = float(n)
    if increases:
        logger.warning(
            f"V increased at {len(increases)} iteration(s), first at n={increases[0]}; "
            "the step may exceed the admissible range"
        )
    traj.diagnostics["v_increases"] = increases
    traj.diagnostics["iterations"] = n
    logger.info(f"{mc.kind} stopped after {n} iterations, ||Xi|| = {sample.xi_norm:.3g}")
    return traj
