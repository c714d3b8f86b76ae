"""
Continuous-time dynamics for the residual Xi and their numerical integration.

Three regimes are supported:

* nominal:  dw/dt = -kappa * Xi(w)
* finite:   dw/dt = -tau * Xi(w) / ||Xi(w)||^((k-2)/(k-1))
* fixed:    dw/dt = -(Gd/Td) * tau(w) * Xi(w), with the gain of ``tau_gain``

Every field is clamped to zero once ||Xi(w)|| <= sing_guard.
"""

import logging
from enum import Enum
from typing import Annotated, Any, Callable, Dict, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .exceptions import NonFiniteStateError
from .model import ProblemInstance, as_vector
from .regimes import ConstantsReport
from .residual import ResidualMap, ResidualSample
from .trajectory import Trajectory, TrajectorySample

logger = logging.getLogger(__name__)

DEFAULT_SING_GUARD = 1e-12
MIN_ADAPTIVE_DT = 1e-8
ADAPTIVE_GROWTH_AFTER = 10


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FixedTimeParams(_Config):
    """Gains and exponents of the fixed/predefined-time gain tau(w)."""

    a1: float = Field(gt=0)
    a2: float = Field(gt=0)
    a3: float = Field(ge=0)
    k1: float = Field(gt=0, lt=1)
    k2: float = Field(gt=1)
    k3: float = Field(default=0.0, ge=0, le=1)
    Gd: float = Field(default=1.0, gt=0)
    Td: float = Field(default=1.0, gt=0)

    @property
    def time_scale(self) -> float:
        return self.Gd / self.Td


class NominalRegime(_Config):
    kind: Literal["nominal"] = "nominal"
    kappa: float = Field(default=1.0, gt=0)


class FiniteTimeRegime(_Config):
    kind: Literal["finite"] = "finite"
    tau: float = Field(default=1.0, gt=0)
    k: float = Field(default=3.0, gt=2)


class FixedTimeRegime(FixedTimeParams):
    kind: Literal["fixed"] = "fixed"


RegimeConfig = Annotated[
    Union[NominalRegime, FiniteTimeRegime, FixedTimeRegime], Field(discriminator="kind")
]


class IntegratorScheme(str, Enum):
    RK4_FIXED = "RK4Fixed"
    EULER_FIXED = "EulerFixed"
    RK4_ADAPTIVE = "RK4Adaptive"


class IntegratorConfig(_Config):
    scheme: IntegratorScheme = IntegratorScheme.RK4_FIXED
    dt: float = Field(default=1e-3, gt=0)
    t_max: float = Field(default=100.0, gt=0)
    settle_tol: float = Field(default=1e-9, gt=0)
    sing_guard: float = Field(default=DEFAULT_SING_GUARD, gt=0)
    sample_stride: int = Field(default=1, ge=1)
    # displacement cap per unit ||Xi|| when no constants are attached
    limiter_scale: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _step_below_horizon(self) -> "IntegratorConfig":
        if not self.dt < self.t_max:
            raise ValueError(f"dt ({self.dt}) must be smaller than t_max ({self.t_max})")
        return self


def tau_gain(fp: FixedTimeParams, xi_norm: float, sing_guard: float = DEFAULT_SING_GUARD) -> float:
    """tau = a1/||Xi||^(1-k1) + a2/||Xi||^(1-k2) + a3/||Xi||^k3, and 0 at the guard.

    Examples:
        xi_norm = 1 -> a1 + a2 + a3
        xi_norm = 0 -> 0
    """
    if xi_norm <= sing_guard:
        return 0.0
    return (
        fp.a1 * xi_norm ** (fp.k1 - 1.0)
        + fp.a2 * xi_norm ** (fp.k2 - 1.0)
        + fp.a3 * xi_norm ** (-fp.k3)
    )


def field_from_sample(
    rc: Any, sample: ResidualSample, sing_guard: float = DEFAULT_SING_GUARD
) -> np.ndarray:
    """The regime's vector field given an already evaluated residual sample."""
    norm = sample.xi_norm
    if norm <= sing_guard:
        return np.zeros_like(sample.xi)
    if isinstance(rc, NominalRegime):
        return -rc.kappa * sample.xi
    if isinstance(rc, FiniteTimeRegime):
        return -rc.tau * sample.xi / norm ** ((rc.k - 2.0) / (rc.k - 1.0))
    return -rc.time_scale * tau_gain(rc, norm, sing_guard) * sample.xi


def rhs(
    p: ProblemInstance,
    rc: Any,
    w: Union[Sequence[float], np.ndarray],
    sing_guard: float = DEFAULT_SING_GUARD,
) -> np.ndarray:
    """Evaluate the vector field of ``rc`` at w.

    Example 1, finite(tau=1, k=3), w = 12 -> -sqrt(26/3).
    """
    return field_from_sample(rc, ResidualMap(p).evaluate(as_vector(w, p.d)), sing_guard)


def describe_regime(rc: Any) -> Dict[str, Any]:
    return rc.model_dump(mode="json")


class _Stepper:
    """One integration step with the displacement limiter.

    The RK4 increment is kept only when it stays within the cap and points along
    the Euler direction; otherwise the step is the Euler direction, capped.
    """

    def __init__(
        self,
        rmap: ResidualMap,
        rc: Any,
        ic: IntegratorConfig,
        modulus: Optional[float],
    ):
        self.rmap = rmap
        self.rc = rc
        self.ic = ic
        self.modulus = modulus
        self.rk4 = ic.scheme != IntegratorScheme.EULER_FIXED

    def field(self, sample: ResidualSample) -> np.ndarray:
        return field_from_sample(self.rc, sample, self.ic.sing_guard)

    def cap(self, xi_norm: float) -> float:
        if self.modulus is not None:
            return max(self.ic.settle_tol, 0.5 * xi_norm / self.modulus)
        return max(self.ic.settle_tol, 0.5 * xi_norm * self.ic.limiter_scale)

    def __call__(self, w: np.ndarray, sample: ResidualSample, h: float) -> Tuple[np.ndarray, bool]:
        k1 = self.field(sample)
        speed = float(np.linalg.norm(k1))
        if speed == 0.0:
            return np.zeros_like(w), False
        cap = self.cap(sample.xi_norm)
        if self.rk4:
            k2 = self.field(self.rmap.evaluate(w + 0.5 * h * k1))
            k3 = self.field(self.rmap.evaluate(w + 0.5 * h * k2))
            k4 = self.field(self.rmap.evaluate(w + h * k3))
            delta = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            delta = h * k1
        if h * speed <= cap and float(np.linalg.norm(delta)) <= cap and float(delta @ k1) > 0:
            return delta, False
        return k1 * min(h, cap / speed), True


def _settle_time(t0: float, t1: float, x0: float, x1: float, tol: float) -> float:
    if x0 <= x1:
        return t1
    return t0 + (t1 - t0) * (x0 - tol) / (x0 - x1)


def integrate(
    p: ProblemInstance,
    rc: Any,
    w0: Union[Sequence[float], np.ndarray],
    ic: IntegratorConfig,
    constants: Optional[ConstantsReport] = None,
    on_step: Optional[Callable[[int, float, float], None]] = None,
) -> Trajectory:
    """Integrate the regime's dynamics from w0 until settling or t_max.

    Args:
        p: Problem instance
        rc: NominalRegime, FiniteTimeRegime or FixedTimeRegime
        w0: Initial state
        ic: Scheme, step, horizon, tolerances and sampling stride
        constants: When given with m > 0, the displacement cap is 0.5*||Xi||/m

    Returns:
        Trajectory whose settled_at is the interpolated first crossing of
        settle_tol, or None when the horizon was reached first
    """
    rmap = ResidualMap(p)
    w = as_vector(w0, p.d)
    modulus = constants.m if constants is not None and constants.m and constants.m > 0 else None
    step = _Stepper(rmap, rc, ic, modulus)
    if isinstance(rc, FixedTimeRegime) and rc.k3 >= 1.0:
        logger.warning(
            "k3 = 1 keeps the field bounded away from zero near the solution; expect chatter"
        )

    traj = Trajectory(regime=describe_regime(rc), horizon=ic.t_max)
    sample = rmap.evaluate(w)
    traj.append(TrajectorySample(t=0.0, w=w, xi_norm=sample.xi_norm))
    if sample.xi_norm <= ic.settle_tol:
        traj.settled_at = 0.0
        return traj

    t = 0.0
    h = ic.dt
    n = 0
    clean = 0
    end = ic.t_max * (1.0 - 1e-12)
    while t < end:
        h_step = min(h, ic.t_max - t)
        delta, limited = step(w, sample, h_step)
        w_next = w + delta
        n += 1
        if not np.all(np.isfinite(w_next)):
            raise NonFiniteStateError(
                f"State became non-finite at step {n} (t={t:.6g})", data={"step": n, "t": t}
            )
        nxt = rmap.evaluate(w_next)
        t_next = t + h_step
        if on_step is not None:
            on_step(n, t_next, nxt.xi_norm)

        if nxt.xi_norm <= ic.settle_tol:
            traj.settled_at = _settle_time(t, t_next, sample.xi_norm, nxt.xi_norm, ic.settle_tol)
            traj.append(TrajectorySample(t=t_next, w=w_next, xi_norm=nxt.xi_norm))
            logger.info(f"Settled at t={traj.settled_at:.6g} after {n} steps")
            return traj
        if n % ic.sample_stride == 0:
            traj.append(TrajectorySample(t=t_next, w=w_next, xi_norm=nxt.xi_norm))

        if ic.scheme == IntegratorScheme.RK4_ADAPTIVE:
            if limited:
                h = max(0.5 * h, MIN_ADAPTIVE_DT)
                clean = 0
                logger.debug(f"Limiter engaged at t={t_next:.6g}, dt -> {h:.3g}")
            else:
                clean += 1
                if clean >= ADAPTIVE_GROWTH_AFTER:
                    h = min(2.0 * h, ic.dt)
                    clean = 0
        elif limited:
            logger.debug(f"Limiter engaged at t={t_next:.6g}")

        w, sample, t = w_next, nxt, t_next

    if traj.final.t < t:
        traj.append(TrajectorySample(t=t, w=w, xi_norm=sample.xi_norm))
    logger.info(f"Horizon {ic.t_max} reached without settling, ||Xi|| = {sample.xi_norm:.3g}")
    return traj


def observed_settling(traj: Trajectory, tol: float) -> Optional[float]:
    """First interpolated time at which xi_norm <= tol, or None."""
    previous = None
    for s in traj.samples:
        if s.xi_norm <= tol:
            if previous is None:
                return s.t
            return _settle_time(previous.t, s.t, previous.xi_norm, s.xi_norm, tol)
        previous = s
    return None
