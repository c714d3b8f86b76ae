"""
Settling-time bounds, error envelopes, Lyapunov monitoring and certificate reports.

All lower-bound constants use the contraction modulus m = sigma - Lambda. The
published rho - Lambda variant is evaluated alongside and reported as informational.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import ConfigError, InvalidConstantsError, NonConvergenceError
from .flow import FiniteTimeRegime, FixedTimeParams, FixedTimeRegime, NominalRegime
from .iterate import ConstantSchedule, Eq29Method
from .model import ProblemInstance, as_vector
from .regimes import ConstantsReport, report_document
from .residual import ResidualMap
from .trajectory import Trajectory
from .utils import json_real

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-9
REFERENCE_MAX_ITER = 1_000_000
RESOLVED_RATIO = 0.5


class InequalityCheck(BaseModel):
    """Worst violation of one inequality; positive values mean it was violated."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    worst_violation: float
    passed: bool
    informational: bool = False
    samples: int = 0

    def document(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "worst_violation": json_real(self.worst_violation),
            "pass": self.passed,
            "informational": self.informational,
            "samples": self.samples,
        }


def _check(
    name: str, violations: np.ndarray, tol: float = CHECK_TOL, informational: bool = False
) -> InequalityCheck:
    worst = float(np.max(violations)) if violations.size else -math.inf
    return InequalityCheck(
        name=name,
        worst_violation=worst,
        passed=bool(worst <= tol),
        informational=informational,
        samples=int(violations.size),
    )


class CertificateReport(BaseModel):
    """Predicted versus observed settling for one run plus the supporting checks."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: str
    regime: Dict[str, Any]
    predicted_bound: float
    observed: Optional[float] = None
    horizon: Optional[float] = None
    bound_respected: bool
    bounds: Dict[str, float] = Field(default_factory=dict)
    checks: List[InequalityCheck] = Field(default_factory=list)
    reference_solution: Tuple[float, ...]
    constants_used: ConstantsReport

    @property
    def all_checks_pass(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def document(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "regime": self.regime,
            "predicted_bound": json_real(self.predicted_bound),
            "observed": json_real(self.observed),
            "horizon": json_real(self.horizon),
            "bound_respected": self.bound_respected,
            "bounds": {k: json_real(v) for k, v in self.bounds.items()},
            "checks": [c.document() for c in self.checks],
            "reference_solution": list(self.reference_solution),
            "constants_used": report_document(self.constants_used),
        }


def bound_respected(predicted: float, observed: Optional[float], horizon: Optional[float]) -> bool:
    """observed <= predicted; without an observation, whether the run stopped short of
    the bound (a run that reached the bound without settling violated it)."""
    if observed is not None:
        return observed <= predicted
    if horizon is None:
        return True
    return horizon < predicted


# Reference solution


def _require_modulus(r: ConstantsReport) -> Tuple[float, float]:
    if r.m is None or r.gamma_const is None or not r.m > 0:
        raise InvalidConstantsError(
            f"A reference solution needs a positive contraction modulus, got m={r.m}",
            data={"m": r.m},
        )
    return r.m, r.gamma_const


def _refine_scalar(rmap: ResidualMap, w: float, m: float) -> float:
    """Bisection on the scalar residual, which is strongly increasing with modulus m."""

    def res(x: float) -> float:
        return float(rmap.evaluate(np.array([x])).xi[0])

    value = res(w)
    if value == 0.0:
        return w
    radius = 2.0 * abs(value) / m + 1e-300
    lo, hi = w - radius, w + radius
    f_lo, f_hi = res(lo), res(hi)
    if f_lo > 0 or f_hi < 0:
        return w
    best, best_abs = w, abs(value)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = res(mid)
        if abs(f_mid) < best_abs:
            best, best_abs = mid, abs(f_mid)
        if f_mid == 0.0:
            break
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    return best


def reference_solution(
    p: ProblemInstance,
    r: ConstantsReport,
    tol: float = 1e-12,
    w0: Optional[Union[Sequence[float], np.ndarray]] = None,
    max_iter: int = REFERENCE_MAX_ITER,
) -> np.ndarray:
    """Solve Xi(w) = 0 by the damped iteration w <- w - (m/Gamma^2) Xi(w).

    One-dimensional problems are then refined by bisection on the scalar residual.

    Raises:
        InvalidConstantsError: when m <= 0 or the report is invalid
        NonConvergenceError: when ||Xi|| > tol after max_iter iterations
    """
    m, big_gamma = _require_modulus(r)
    eta = m / (big_gamma * big_gamma)
    rmap = ResidualMap(p)
    w = np.zeros(p.d) if w0 is None else as_vector(w0, p.d).copy()
    sample = rmap.evaluate(w)
    n = 0
    while sample.xi_norm > tol:
        if n >= max_iter:
            raise NonConvergenceError(
                f"Reference iteration did not reach {tol} within {max_iter} iterations "
                f"(||Xi|| = {sample.xi_norm:.3g})",
                data={"iterations": n, "xi_norm": sample.xi_norm},
            )
        w = w - eta * sample.xi
        sample = rmap.evaluate(w)
        n += 1
    if p.d == 1:
        w = np.array([_refine_scalar(rmap, float(w[0]), m)])
    logger.info(f"Reference solution found after {n} iterations")
    return w


# Bound formulas


def finite_time_lyapunov_bound(v0: float, gain: float, exponent: float) -> float:
    """Settling bound V0^(1-r) / (M (1-r)) for dV/dt <= -M V^r with 0 < r < 1."""
    if v0 <= 0:
        return 0.0
    return v0 ** (1.0 - exponent) / (gain * (1.0 - exponent))


def finite_time_bound(dist0: float, tau: float, k: float, m: float) -> float:
    """Settling bound of the finite-time flow from distance dist0.

    With p = k/(2(k-1)) and K = 2^p tau m^(1/(k-1)), V = dist^2/2 obeys
    dV/dt <= -K V^p.

    Example 1 (m = 0.5), tau = 1, k = 3, dist0 = 50 -> 20.0.
    """
    p = k / (2.0 * (k - 1.0))
    gain = 2.0**p * tau * m ** (1.0 / (k - 1.0))
    return finite_time_lyapunov_bound(0.5 * dist0 * dist0, gain, p)


def fixed_time_bound(a1: float, a2: float, s1: float, s2: float) -> float:
    """Settling bound for dV/dt <= -(A1 V^s1 + A2 V^s2).

    The generic bound is 1/(A1(1-s1)) + 1/(A2(s2-1)). When 1 - s1 = s2 - 1 and
    chi = 1/(2(1-s1)) > 1, the tighter pi*chi/sqrt(A1 A2) also applies.
    """
    generic = 1.0 / (a1 * (1.0 - s1)) + 1.0 / (a2 * (s2 - 1.0))
    if math.isclose(1.0 - s1, s2 - 1.0, rel_tol=0.0, abs_tol=1e-12):
        chi = 1.0 / (2.0 * (1.0 - s1))
        if chi > 1.0:
            return min(generic, math.pi * chi / math.sqrt(a1 * a2))
    return generic


def a_coefficients(fp: FixedTimeParams, m: float, big_gamma: float) -> Tuple[float, float]:
    """(A1, A2) of the fixed-time Lyapunov inequality.

    A2 is taken at the lower end of its admissible interval, which does not depend on
    the initial condition.
    """
    scale = fp.Gd / fp.Td
    a1 = 2.0 ** ((1.0 + fp.k1) / 2.0) * scale * fp.a1 * m / big_gamma ** (1.0 - fp.k1)
    a2 = 2.0 ** ((1.0 + fp.k2) / 2.0) * scale * m**fp.k2 * fp.a2
    return a1, a2


def _log_ratio(c: float, x: float) -> float:
    """ln(1 + c x) / c, continued to x at c = 0."""
    if c == 0:
        return x
    return math.log1p(c * x) / c


def predefined_gain(c1: float, c2: float, c3: float, r1: float, r2: float) -> float:
    """Time constant of dV/dt <= -(c1 V^r1 + c2 V^r2 + c3 V):

    1/(c3(1-r1)) ln(1 + c3/c1) + 1/(c3(r2-1)) ln(1 + c3/c2), with its c3 -> 0 limit.
    """
    return _log_ratio(c3, 1.0 / c1) / (1.0 - r1) + _log_ratio(c3, 1.0 / c2) / (r2 - 1.0)


def predefined_gd(
    a1: float, a2: float, a3: float, k1: float, k2: float, m: float, big_gamma: float
) -> float:
    """Gain G_d for which the k3 = 0 fixed-time flow settles within T_d.

    Example 1 with a1=0.9, a2=0.5, a3=1e-4, k1=0.4, k2=1.5, m=0.5, Gamma=0.75 -> 13.35.
    """
    c1 = a1 * m / (math.sqrt(2.0) ** (1.0 - k1) * big_gamma ** (1.0 - k1))
    c2 = a2 * m / (math.sqrt(2.0) ** (1.0 - k2) * m ** (1.0 - k2))
    return predefined_gain(c1, c2, a3 * m, k1, k2)


def predefined_bound(fp: FixedTimeParams, m: float, big_gamma: float) -> float:
    """T_d * G_d*/G_d for k3 = 0; equals T_d when G_d is the predefined gain."""
    if fp.k3 != 0:
        return math.inf
    gd_star = predefined_gd(fp.a1, fp.a2, fp.a3, fp.k1, fp.k2, m, big_gamma)
    return fp.Td * gd_star / fp.Gd


def _envelope_value(x: float, a1: float, a2: float, chi: float) -> float:
    angle = math.pi / 2.0 - math.sqrt(a1 * a2) * x / chi
    if angle <= 0:
        return 0.0
    if x <= 0:
        return math.inf
    return math.sqrt(2.0) * (math.sqrt(a1 / a2) * math.tan(angle)) ** (chi / 2.0)


def continuous_envelope(t: float, a1: float, a2: float, chi: float) -> float:
    """Distance envelope of the comparison system started from V = infinity."""
    return _envelope_value(t, a1, a2, chi)


def envelope_horizon(a1: float, a2: float, chi: float, theta: float) -> int:
    """n* = ceil(chi*pi / (2 theta sqrt(A1 A2)))."""
    return int(math.ceil(chi * math.pi / (2.0 * theta * math.sqrt(a1 * a2))))


def discrete_envelope(
    n: int, a1: float, a2: float, chi: float, theta: float, eps: float
) -> float:
    """Error envelope of the discretized fixed-time flow at iteration n.

    Infinite at n = 0, eps from n* on, and in between
    sqrt(2) (sqrt(A1/A2) tan(pi/2 - sqrt(A1 A2) theta n / chi))^(chi/2) + eps.
    """
    if n <= 0:
        return math.inf
    if n >= envelope_horizon(a1, a2, chi, theta):
        return eps
    return _envelope_value(theta * n, a1, a2, chi) + eps


def symmetric_chi(fp: FixedTimeParams) -> Optional[float]:
    """chi with k1 = 1 - 2/chi and k2 = 1 + 2/chi, if the exponents are symmetric."""
    if not math.isclose(1.0 - fp.k1, fp.k2 - 1.0, rel_tol=0.0, abs_tol=1e-12):
        return None
    chi = 2.0 / (1.0 - fp.k1)
    return chi if chi > 2.0 else None


# Monitors and harnesses


def lyapunov_series(
    traj: Trajectory, wbar: Union[Sequence[float], np.ndarray]
) -> List[Tuple[float, float]]:
    """(t, V) per sample with V = 0.5 * ||w - wbar||^2."""
    center = as_vector(wbar, traj.dimension or None)
    return [(s.t, 0.5 * float(np.sum((s.w - center) ** 2))) for s in traj.samples]


def _pre_settling_count(traj: Trajectory) -> int:
    if traj.settled_at is None:
        return len(traj.samples)
    return sum(1 for s in traj.samples if s.t < traj.settled_at)


def check_lyapunov_decrease(
    traj: Trajectory, wbar: Union[Sequence[float], np.ndarray]
) -> InequalityCheck:
    """V strictly decreases between consecutive samples until settling."""
    series = np.array([v for _, v in lyapunov_series(traj, wbar)])
    count = min(_pre_settling_count(traj), len(series) - 1)
    steps = (series[1 : count + 1] - series[:count])[series[:count] > 0]
    worst = float(np.max(steps)) if steps.size else -math.inf
    return InequalityCheck(
        name="lyapunov_decrease", worst_violation=worst, passed=worst < 0, samples=int(steps.size)
    )


def check_diff_inequality(
    traj: Trajectory,
    wbar: Union[Sequence[float], np.ndarray],
    a1: float,
    a2: float,
    s1: float,
    s2: float,
    slack_rel: float = 0.05,
) -> InequalityCheck:
    """dV/dt <= -(A1 V^s1 + A2 V^s2)(1 - slack_rel) at interior pre-settling samples,
    with dV/dt from central differences on the sample grid.

    Windows over which V falls below RESOLVED_RATIO of its value are not resolved by
    the grid (limited steps near settling) and are skipped.
    """
    if len(traj.samples) < 3:
        raise ConfigError(
            f"check_diff_inequality needs at least 3 samples, got {len(traj.samples)}"
        )
    series = lyapunov_series(traj, wbar)
    t = np.array([x for x, _ in series])
    v = np.array([y for _, y in series])
    last = min(_pre_settling_count(traj), len(series) - 1)
    idx = np.arange(1, last)
    idx = idx[(v[idx] > 0) & (v[idx + 1] >= RESOLVED_RATIO * v[idx - 1])]
    if idx.size == 0:
        return _check("diff_inequality", np.array([]))
    v_dot = (v[idx + 1] - v[idx - 1]) / (t[idx + 1] - t[idx - 1])
    bound = -(a1 * v[idx] ** s1 + a2 * v[idx] ** s2) * (1.0 - slack_rel)
    return _check("diff_inequality", v_dot - bound, tol=1e-12)


def check_lemma_bdt(
    p: ProblemInstance,
    r: ConstantsReport,
    wbar: Union[Sequence[float], np.ndarray],
    n_samples: int = 10_000,
    radius: float = 100.0,
    seed: int = 0,
    extra_points: Sequence[Sequence[float]] = (),
) -> List[InequalityCheck]:
    """Sample the residual inequalities around wbar.

    Checked with Gamma, Lambda and m:
    lipschitz        ||Xi(u) - Xi(v)|| <= Gamma ||u - v||
    b_contraction    ||B(w) - B(wbar)|| <= Lambda ||w - wbar||
    residual_upper   ||Xi(w)|| <= Gamma ||w - wbar||
    residual_lower   m ||w - wbar|| <= ||Xi(w)||
    correlation      <w - wbar, Xi(w)> >= m ||w - wbar||^2

    The last two are repeated with rho - Lambda as informational checks.
    """
    if r.gamma_const is None or r.lambda_const is None or r.m is None:
        raise InvalidConstantsError("check_lemma_bdt needs a valid constants report")
    center = as_vector(wbar, p.d)
    rmap = ResidualMap(p)
    rng = np.random.default_rng(seed)
    points = rng.uniform(-radius, radius, (n_samples, p.d))
    if len(extra_points):
        points = np.vstack([points, np.asarray(extra_points, dtype=float).reshape(-1, p.d)])
    partners = rng.uniform(-radius, radius, (points.shape[0], p.d))

    at_points = [rmap.evaluate(w) for w in points]
    at_partners = [rmap.evaluate(w) for w in partners]
    b_bar = rmap.evaluate(center).b
    xi = np.array([s.xi for s in at_points])
    xi_partner = np.array([s.xi for s in at_partners])
    b = np.array([s.b for s in at_points])

    offset = points - center
    dist = np.linalg.norm(offset, axis=1)
    xi_norm = np.linalg.norm(xi, axis=1)
    corr = np.einsum("ij,ij->i", offset, xi)
    gap = np.linalg.norm(points - partners, axis=1)

    big_gamma, big_lambda, m = r.gamma_const, r.lambda_const, r.m
    printed = r.rho - big_lambda
    return [
        _check("lipschitz", np.linalg.norm(xi - xi_partner, axis=1) - big_gamma * gap),
        _check("b_contraction", np.linalg.norm(b - b_bar, axis=1) - big_lambda * dist),
        _check("residual_upper", xi_norm - big_gamma * dist),
        _check("residual_lower", m * dist - xi_norm),
        _check("correlation", m * dist**2 - corr),
        _check("residual_lower_printed", printed * dist - xi_norm, informational=True),
        _check("correlation_printed", printed * dist**2 - corr, informational=True),
    ]


# Certificate builders


def flow_bounds(
    rc: Any, dist0: float, r: ConstantsReport, settle_tol: float
) -> Dict[str, float]:
    """Every applicable settling bound for a continuous run; the minimum is predicted."""
    m, big_gamma = _require_modulus(r)
    if isinstance(rc, NominalRegime):
        # ||Xi(t)|| <= Gamma dist0 exp(-kappa m t)
        start = big_gamma * dist0
        if start <= settle_tol:
            return {"exponential": 0.0}
        return {"exponential": math.log(start / settle_tol) / (rc.kappa * m)}
    if isinstance(rc, FiniteTimeRegime):
        return {"finite_time": finite_time_bound(dist0, rc.tau, rc.k, m)}
    a1, a2 = a_coefficients(rc, m, big_gamma)
    bounds = {
        "fixed_time": fixed_time_bound(a1, a2, (1.0 + rc.k1) / 2.0, (1.0 + rc.k2) / 2.0)
    }
    if rc.k3 == 0 and rc.a3 > 0:
        bounds["predefined_time"] = predefined_bound(rc, m, big_gamma)
    return bounds


def flow_certificate(
    p: ProblemInstance,
    rc: Any,
    traj: Trajectory,
    r: ConstantsReport,
    wbar: Union[Sequence[float], np.ndarray],
    settle_tol: float,
    slack_rel: float = 0.05,
) -> CertificateReport:
    """Certificate for an integrated trajectory."""
    center = as_vector(wbar, p.d)
    dist0 = float(np.linalg.norm(traj.samples[0].w - center))
    bounds = flow_bounds(rc, dist0, r, settle_tol)
    predicted = min(bounds.values())
    checks = [check_lyapunov_decrease(traj, center)]
    if isinstance(rc, FixedTimeRegime):
        m, big_gamma = _require_modulus(r)
        a1, a2 = a_coefficients(rc, m, big_gamma)
        if len(traj.samples) >= 3:
            checks.append(
                check_diff_inequality(
                    traj, center, a1, a2, (1.0 + rc.k1) / 2.0, (1.0 + rc.k2) / 2.0, slack_rel
                )
            )
        chi = symmetric_chi(rc)
        if chi is not None:
            dists = np.array([np.linalg.norm(s.w - center) for s in traj.samples])
            env = np.array([continuous_envelope(s.t, a1, a2, chi) for s in traj.samples])
            checks.append(_check("continuous_envelope", dists - env, informational=True))
    observed = traj.settled_at
    respected = bound_respected(predicted, observed, traj.horizon)
    if observed is not None and not respected:
        logger.warning(f"Observed settling {observed:.6g} exceeds predicted bound {predicted:.6g}")
    return CertificateReport(
        kind="flow",
        regime=traj.regime,
        predicted_bound=predicted,
        observed=observed,
        horizon=traj.horizon,
        bound_respected=respected,
        bounds=bounds,
        checks=checks,
        reference_solution=tuple(float(x) for x in center),
        constants_used=r,
    )


def discrete_certificate(
    p: ProblemInstance,
    mc: Any,
    traj: Trajectory,
    r: ConstantsReport,
    wbar: Union[Sequence[float], np.ndarray],
    eps: float = 1e-2,
) -> CertificateReport:
    """Certificate for an iterated run.

    Eq29 with a constant step and symmetric exponents predicts the iteration count n*
    and observes the first n with ||w_n - wbar|| <= eps; the envelope is checked for
    every recorded n <= n*. Other methods predict no bound.
    """
    center = as_vector(wbar, p.d)
    dists = np.array([np.linalg.norm(s.w - center) for s in traj.samples])
    bounds: Dict[str, float] = {}
    checks = [
        _check(
            "lyapunov_increase",
            np.array([float(len(traj.diagnostics.get("v_increases", [])))]),
            tol=0.0,
            informational=True,
        )
    ]
    observed = traj.settled_at
    chi = symmetric_chi(mc.params) if isinstance(mc, Eq29Method) else None
    if chi is not None and isinstance(mc.schedule, ConstantSchedule):
        m, big_gamma = _require_modulus(r)
        a1, a2 = a_coefficients(mc.params, m, big_gamma)
        theta = mc.schedule.theta
        n_star = envelope_horizon(a1, a2, chi, theta)
        bounds["discrete_envelope"] = float(n_star)
        violations = [
            dists[i] - discrete_envelope(int(s.t), a1, a2, chi, theta, eps)
            for i, s in enumerate(traj.samples)
            if s.t <= n_star
        ]
        checks.append(_check("discrete_envelope", np.array(violations)))
        reached = np.nonzero(dists <= eps)[0]
        observed = float(traj.samples[reached[0]].t) if reached.size else None
    predicted = min(bounds.values()) if bounds else math.inf
    return CertificateReport(
        kind="discrete",
        regime=traj.regime,
        predicted_bound=predicted,
        observed=observed,
        horizon=traj.horizon,
        bound_respected=bound_respected(predicted, observed, traj.horizon),
        bounds=bounds,
        checks=checks,
        reference_solution=tuple(float(x) for x in center),
        constants_used=r,
    )
