"""
Proximal operators prox^{gamma g}_omega for the cataloged (g, omega) pairs.

prox(x) is the unique minimizer of gamma*g(v) + 0.5*||x - v||^2 over v in omega.
Closed forms cover the common pairs; separable g on box-like sets falls back to
per-coordinate bisection on the monotone optimality map.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DimensionMismatchError, NonConvergenceError, UnsupportedPairError
from .model import (
    Ball,
    Halfspace,
    L1G,
    SeparableCustomG,
    SeparableQuadraticG,
    ZeroG,
    box_bounds,
)
from .registry import Abs1D, Convex1D, Quadratic1D, Zero1D, get_function_1d

logger = logging.getLogger(__name__)

DEFAULT_BISECT_TOL = 1e-12
FEASIBILITY_TOL = 1e-12


class ProxMethod(str, Enum):
    CLOSED_FORM = "ClosedForm"
    BISECTION = "Bisection"


@dataclass(frozen=True)
class ProxResult:
    """Prox value plus how it was obtained.

    ``residual`` is the worst per-coordinate optimality residual for bisection and 0
    for closed forms.
    """

    point: np.ndarray
    method: ProxMethod
    residual: float = 0.0


ProxKernel = Callable[[np.ndarray], ProxResult]


def coordinate_functions(g: Any, d: int) -> Optional[List[Convex1D]]:
    """Split a separable g into its scalar pieces, or None if g is not separable.

    The constant term of a separable quadratic does not affect the prox and is dropped.
    """
    if isinstance(g, ZeroG):
        return [Zero1D()] * d
    if isinstance(g, SeparableQuadraticG):
        return [Quadratic1D(a=a, b=b) for a, b in zip(g.a, g.b)]
    if isinstance(g, L1G):
        return [Abs1D(weight=g.weight)] * d
    if isinstance(g, SeparableCustomG):
        return [get_function_1d(name) for name in g.names]
    return None


def g_value(g: Any, v: Union[Sequence[float], np.ndarray]) -> float:
    """Evaluate g at v."""
    x = np.asarray(v, dtype=float)
    if isinstance(g, ZeroG):
        return 0.0
    if isinstance(g, SeparableQuadraticG):
        a = np.asarray(g.a)
        b = np.asarray(g.b)
        return float(np.sum(a * x * x + b * x) + g.c)
    if isinstance(g, L1G):
        return float(g.weight * np.sum(np.abs(x)))
    return float(sum(get_function_1d(name).value(float(xi)) for name, xi in zip(g.names, x)))


def contains(
    omega: Any, x: Union[Sequence[float], np.ndarray], tol: float = FEASIBILITY_TOL
) -> bool:
    """Membership in omega up to an absolute tolerance."""
    v = np.asarray(x, dtype=float)
    bounds = box_bounds(omega, v.shape[0])
    if bounds is not None:
        lo, hi = bounds
        return bool(np.all(v >= lo - tol) and np.all(v <= hi + tol))
    if isinstance(omega, Ball):
        return bool(np.linalg.norm(v - np.asarray(omega.center)) <= omega.radius + tol)
    normal = np.asarray(omega.normal)
    return bool(normal @ v <= omega.offset + tol)


def _check_dimension(omega: Any, x: np.ndarray) -> None:
    expected = None
    if isinstance(omega, Ball):
        expected = len(omega.center)
    elif isinstance(omega, Halfspace):
        expected = len(omega.normal)
    else:
        bounds = getattr(omega, "lo", None)
        expected = len(bounds) if bounds is not None else None
    if expected is not None and x.shape[0] != expected:
        raise DimensionMismatchError(
            f"dimension mismatch: set has dimension {expected}, point has {x.shape[0]}"
        )


def project(omega: Any, x: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """Euclidean projection onto omega.

    Examples:
        project(NonnegativeOrthant(), [-1, 2]) -> [0, 2]
        project(Halfspace(normal=[1, 0], offset=0), [2, 1]) -> [0, 1]
    """
    v = np.asarray(x, dtype=float)
    _check_dimension(omega, v)
    bounds = box_bounds(omega, v.shape[0])
    if bounds is not None:
        return np.clip(v, bounds[0], bounds[1])
    if isinstance(omega, Ball):
        center = np.asarray(omega.center, dtype=float)
        offset = v - center
        dist = float(np.linalg.norm(offset))
        if dist <= omega.radius:
            return v.copy()
        return center + offset * (omega.radius / dist)
    normal = np.asarray(omega.normal, dtype=float)
    excess = float(normal @ v) - omega.offset
    if excess <= 0:
        return v.copy()
    return v - (excess / float(normal @ normal)) * normal


def _bisect(
    g1d: Convex1D, lo: float, hi: float, gamma: float, x: float, tol: float
) -> Tuple[float, float]:
    """Solve 0 in gamma*dg(v) + v - x over [lo, hi]; returns (v, residual)."""

    def phi(v: float) -> Tuple[float, float]:
        left, right = g1d.derivative_bounds(v)
        return gamma * left + v - x, gamma * right + v - x

    left_x, right_x = g1d.derivative_bounds(x)
    spread = gamma * max(abs(left_x), abs(right_x))
    a = max(lo, x - spread - 1.0)
    b = min(hi, x + spread + 1.0)
    if a > b:
        # x far outside a bounded interval; the nearest end is optimal
        a = b = lo if x < lo else hi

    phi_a = phi(a)
    if phi_a[1] >= 0:
        return a, max(0.0, phi_a[0])
    phi_b = phi(b)
    if phi_b[0] <= 0:
        return b, max(0.0, -phi_b[1])

    width = b - a
    cap = 64 + max(0, math.ceil(math.log2(width / tol))) if width > tol else 64
    for _ in range(cap):
        mid = 0.5 * (a + b)
        phi_l, phi_r = phi(mid)
        residual = max(0.0, phi_l, -phi_r)
        if residual <= tol or b - a <= tol or mid in (a, b):
            return mid, residual
        if phi_r < 0:
            a = mid
        else:
            b = mid
    raise NonConvergenceError(
        f"prox bisection did not reach tolerance {tol} within {cap} iterations",
        data={"x": x, "interval": [lo, hi], "bracket": [a, b]},
    )


def prox_bisect_1d(
    g1d: Convex1D,
    interval: Tuple[float, float],
    gamma: float,
    x: float,
    tol: float = DEFAULT_BISECT_TOL,
) -> float:
    """Scalar prox of gamma*g1d over an interval by bisection.

    Args:
        g1d: Convex scalar function with one-sided derivatives
        interval: (lo, hi), either end may be infinite
        gamma: Positive prox parameter
        x: Input point
        tol: Target for the optimality residual or bracket width

    Returns:
        The minimizer within tolerance
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = interval
    return _bisect(g1d, float(lo), float(hi), float(gamma), float(x), tol)[0]


def compile_prox(
    g: Any,
    omega: Any,
    gamma: float,
    d: int,
    method: Optional[ProxMethod] = None,
    tol: float = DEFAULT_BISECT_TOL,
) -> ProxKernel:
    """Resolve the (g, omega) pair once and return a kernel x -> ProxResult.

    ``method=ProxMethod.BISECTION`` forces the per-coordinate fallback even when a
    closed form exists.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    bounds = box_bounds(omega, d)

    if isinstance(g, ZeroG) and method != ProxMethod.BISECTION:
        return lambda x: ProxResult(project(omega, x), ProxMethod.CLOSED_FORM)

    if bounds is None:
        raise UnsupportedPairError(
            f"No prox available for g={g.type} on omega={omega.type}",
            data={"g": g.type, "omega": omega.type},
        )
    lo, hi = bounds

    if method != ProxMethod.BISECTION:
        if isinstance(g, SeparableQuadraticG):
            a = np.asarray(g.a, dtype=float)
            b = np.asarray(g.b, dtype=float)
            denom = 1.0 + 2.0 * gamma * a
            shift = gamma * b

            def quadratic(x: np.ndarray) -> ProxResult:
                return ProxResult(np.clip((x - shift) / denom, lo, hi), ProxMethod.CLOSED_FORM)

            return quadratic
        if isinstance(g, L1G):
            threshold = gamma * g.weight

            def soft(x: np.ndarray) -> ProxResult:
                shrunk = np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)
                return ProxResult(np.clip(shrunk, lo, hi), ProxMethod.CLOSED_FORM)

            return soft

    pieces = coordinate_functions(g, d)
    if pieces is None:
        raise UnsupportedPairError(
            f"g={g.type} is not separable; no prox fallback", data={"g": g.type}
        )
    logger.debug(f"Using bisection prox for g={g.type} on omega={omega.type}")

    def bisection(x: np.ndarray) -> ProxResult:
        point = np.empty(d)
        worst = 0.0
        for i, piece in enumerate(pieces):
            point[i], residual = _bisect(piece, lo[i], hi[i], gamma, float(x[i]), tol)
            worst = max(worst, residual)
        return ProxResult(point, ProxMethod.BISECTION, worst)

    return bisection


def prox(
    g: Any,
    omega: Any,
    gamma: float,
    x: Union[Sequence[float], np.ndarray],
    method: Optional[ProxMethod] = None,
) -> ProxResult:
    """Evaluate prox^{gamma g}_omega(x).

    Examples:
        g = v^2 + 2v + 1, omega = [0, inf), gamma = 1: x = 5 -> 1, x = -4 -> 0
        g = 0, omega = Ball(0, 1): x = [3, 4] -> [0.6, 0.8]
    """
    v = np.asarray(x, dtype=float).reshape(-1)
    _check_dimension(omega, v)
    return compile_prox(g, omega, gamma, v.shape[0], method=method)(v)
