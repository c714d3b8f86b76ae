"""
gimvip

Solvers and settling-time certificates for generalized inverse mixed variational
inequality problems: find w* with F(w*) in Omega and
<h(w*), v - F(w*)> + g(v) - g(F(w*)) >= 0 for all v in Omega.
"""

__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    DimensionMismatchError,
    GimvipError,
    InvalidConstantsError,
    NonConvergenceError,
    NonFiniteStateError,
    ProblemLoadError,
    UnknownCustomError,
    UnsupportedPairError,
)
from .model import ProblemInstance, load_builtin, load_problem, load_problem_file
from .residual import ResidualMap

__all__ = [
    "__version__",
    "ConfigError",
    "DimensionMismatchError",
    "GimvipError",
    "InvalidConstantsError",
    "NonConvergenceError",
    "NonFiniteStateError",
    "ProblemLoadError",
    "ProblemInstance",
    "ResidualMap",
    "UnknownCustomError",
    "UnsupportedPairError",
    "load_builtin",
    "load_problem",
    "load_problem_file",
]
