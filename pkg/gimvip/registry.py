"""
Registries of named custom operators and one-dimensional convex functions.

Problem documents refer to custom pieces by name only; the names resolve here at load
time. New entries are added from Python with the ``register_operator`` decorator or
a ``register_function_1d`` call.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from .exceptions import UnknownCustomError

logger = logging.getLogger(__name__)

OperatorFn = Callable[[np.ndarray], np.ndarray]

_OPERATORS: Dict[str, OperatorFn] = {}
_FUNCTIONS_1D: Dict[str, "Convex1D"] = {}


class Convex1D:
    """A proper convex scalar function with one-sided derivative access.

    Subclasses implement ``value`` and ``derivative_bounds``; the latter returns the
    left and right derivatives at ``v``, i.e. the endpoints of the subdifferential.
    """

    def value(self, v: float) -> float:
        raise NotImplementedError

    def derivative_bounds(self, v: float) -> Tuple[float, float]:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero1D(Convex1D):
    def value(self, v: float) -> float:
        return 0.0

    def derivative_bounds(self, v: float) -> Tuple[float, float]:
        return 0.0, 0.0


@dataclass(frozen=True)
class Quadratic1D(Convex1D):
    """a*v**2 + b*v + c with a >= 0."""

    a: float
    b: float = 0.0
    c: float = 0.0

    def value(self, v: float) -> float:
        return self.a * v * v + self.b * v + self.c

    def derivative_bounds(self, v: float) -> Tuple[float, float]:
        slope = 2.0 * self.a * v + self.b
        return slope, slope


@dataclass(frozen=True)
class Abs1D(Convex1D):
    """weight*|v|."""

    weight: float = 1.0

    def value(self, v: float) -> float:
        return self.weight * abs(v)

    def derivative_bounds(self, v: float) -> Tuple[float, float]:
        if v > 0:
            return self.weight, self.weight
        if v < 0:
            return -self.weight, -self.weight
        return -self.weight, self.weight


@dataclass(frozen=True)
class Huber1D(Convex1D):
    delta: float = 1.0

    def value(self, v: float) -> float:
        if abs(v) <= self.delta:
            return 0.5 * v * v
        return self.delta * (abs(v) - 0.5 * self.delta)

    def derivative_bounds(self, v: float) -> Tuple[float, float]:
        slope = max(-self.delta, min(self.delta, v))
        return slope, slope


def register_operator(name: str) -> Callable[[OperatorFn], OperatorFn]:
    """Decorator registering a map R^d -> R^d under ``name``.

    Args:
        name: Identifier used by ``{"type": "custom", "name": ...}`` documents

    Returns:
        The decorator, which returns the function unchanged
    """

    def decorator(fn: OperatorFn) -> OperatorFn:
        if name in _OPERATORS:
            logger.warning(f"Replacing registered operator {name}")
        _OPERATORS[name] = fn
        return fn

    return decorator


def register_function_1d(name: str, fn: Convex1D) -> Convex1D:
    """Register a scalar convex function for separable custom g."""
    if name in _FUNCTIONS_1D:
        logger.warning(f"Replacing registered 1-D function {name}")
    _FUNCTIONS_1D[name] = fn
    return fn


def get_operator(name: str) -> OperatorFn:
    try:
        return _OPERATORS[name]
    except KeyError:
        raise UnknownCustomError(f"Unknown custom operator: {name}", data={"name": name})


def get_function_1d(name: str) -> Convex1D:
    try:
        return _FUNCTIONS_1D[name]
    except KeyError:
        raise UnknownCustomError(f"Unknown custom 1-D function: {name}", data={"name": name})


def has_operator(name: str) -> bool:
    return name in _OPERATORS


def has_function_1d(name: str) -> bool:
    return name in _FUNCTIONS_1D


@register_operator("identity")
def _identity(w: np.ndarray) -> np.ndarray:
    return np.array(w, dtype=float, copy=True)


@register_operator("scaled_tanh")
def _scaled_tanh(w: np.ndarray) -> np.ndarray:
    # 0.5-strongly monotone, 0.75-Lipschitz
    return 0.5 * w + 0.25 * np.tanh(w)


register_function_1d("square", Quadratic1D(a=1.0))
register_function_1d("abs", Abs1D(weight=1.0))
register_function_1d("huber", Huber1D(delta=1.0))
register_function_1d("zero", Zero1D())

