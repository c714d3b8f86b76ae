"""
The backward map B(w) = prox^{gamma g}_omega(F(w) - h(w)) and the residual
Xi(w) = F(w) - B(w), whose zeros are exactly the problem's solutions.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import DimensionMismatchError
from .model import ProblemInstance, as_vector, eval_operator
from .proxcat import ProxMethod, compile_prox

logger = logging.getLogger(__name__)

# residual norms below this are reported as exactly zero
SETTLED_FLOOR = 1e-14


@dataclass(frozen=True)
class ResidualSample:
    w: np.ndarray
    xi: np.ndarray
    xi_norm: float
    b: np.ndarray


class ResidualMap:
    """Xi and B for one problem, with the prox pair resolved up front.

    Integrators evaluate the residual several times per step, so the operator and
    prox dispatch is done once here instead of on every call.
    """

    def __init__(self, problem: ProblemInstance, prox_method: Optional[ProxMethod] = None):
        self.problem = problem
        self._prox = compile_prox(
            problem.g, problem.omega, problem.gamma, problem.d, method=prox_method
        )

    @property
    def d(self) -> int:
        return self.problem.d

    def evaluate(self, w: Union[Sequence[float], np.ndarray]) -> ResidualSample:
        x = np.asarray(w, dtype=float).reshape(-1)
        if x.shape[0] != self.d:
            raise DimensionMismatchError(
                f"dimension mismatch: point has {x.shape[0]} entries, problem has {self.d}",
                data={"expected": self.d, "actual": int(x.shape[0])},
            )
        f = eval_operator(self.problem.F, x)
        b = self._prox(f - eval_operator(self.problem.h, x)).point
        xi = f - b
        norm = float(np.linalg.norm(xi))
        if norm < SETTLED_FLOOR:
            norm = 0.0
        return ResidualSample(w=x, xi=xi, xi_norm=norm, b=b)

    def b(self, w: Union[Sequence[float], np.ndarray]) -> np.ndarray:
        return self.evaluate(w).b

    def xi_norm(self, w: Union[Sequence[float], np.ndarray]) -> float:
        return self.evaluate(w).xi_norm


def b_map(p: ProblemInstance, w: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """B(w); lies in omega.

    Example 1: b_map(12) = 1/3, b_map(0) = 0, b_map(-4) = 0.
    """
    return ResidualMap(p).evaluate(as_vector(w, p.d)).b


def xi(p: ProblemInstance, w: Union[Sequence[float], np.ndarray]) -> ResidualSample:
    """Residual sample at w.

    Example 1: xi(0) = 0, xi(12) = 26/3, xi(-4) = -3.
    """
    return ResidualMap(p).evaluate(as_vector(w, p.d))
