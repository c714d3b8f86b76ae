"""
Problem data model for generalized inverse mixed variational inequalities.

A problem asks for w with F(w) in omega and
<h(w), v - F(w)> + g(v) - g(F(w)) >= 0 for every v in omega.
This module defines the operator, function and set specifications, the validated
ProblemInstance, and loading from the JSON problem document.
"""

import json
import logging
import math
from functools import cached_property
from pathlib import Path
from typing import Annotated, Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import (
    AfterValidator,
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    ValidationError,
    field_serializer,
    field_validator,
    model_validator,
)

from .exceptions import DimensionMismatchError, ProblemLoadError
from .registry import get_function_1d, get_operator

logger = logging.getLogger(__name__)


def _check_finite(values: Tuple[float, ...]) -> Tuple[float, ...]:
    if len(values) == 0:
        raise ValueError("vector must have at least one entry")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("vector entries must be finite")
    return values


def _lower_bound(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(-math.inf if v is None else v for v in value)
    return value


def _upper_bound(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(math.inf if v is None else v for v in value)
    return value


def _check_finite_real(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return value


Vector = Annotated[Tuple[float, ...], AfterValidator(_check_finite)]
FiniteReal = Annotated[float, AfterValidator(_check_finite_real)]
LowerBounds = Annotated[Tuple[float, ...], BeforeValidator(_lower_bound)]
UpperBounds = Annotated[Tuple[float, ...], BeforeValidator(_upper_bound)]


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# Operators


class AffineOperator(_Spec):
    """w -> M w + q."""

    type: Literal["affine"] = "affine"
    matrix: Tuple[Vector, ...]
    offset: Optional[Vector] = None

    @model_validator(mode="after")
    def _square(self) -> "AffineOperator":
        n = len(self.matrix)
        if n == 0 or any(len(row) != n for row in self.matrix):
            raise ValueError("affine matrix must be square")
        if self.offset is not None and len(self.offset) != n:
            raise ValueError("affine offset length must match the matrix")
        return self

    @property
    def dimension(self) -> int:
        return len(self.matrix)

    @cached_property
    def matrix_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @cached_property
    def offset_array(self) -> np.ndarray:
        if self.offset is None:
            return np.zeros(self.dimension)
        return np.array(self.offset, dtype=float)


class ScalarLinearOperator(_Spec):
    """w -> c w."""

    type: Literal["scalar_linear"] = "scalar_linear"
    coefficient: float

    @field_validator("coefficient")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("coefficient must be finite")
        return v


class CustomOperator(_Spec):
    type: Literal["custom"] = "custom"
    name: str

    @field_validator("name")
    @classmethod
    def _registered(cls, v: str) -> str:
        # raises UnknownCustomError, which pydantic lets propagate
        get_operator(v)
        return v


OperatorSpec = Annotated[
    Union[AffineOperator, ScalarLinearOperator, CustomOperator], Field(discriminator="type")
]


# Functions g


class ZeroG(_Spec):
    type: Literal["zero"] = "zero"


class SeparableQuadraticG(_Spec):
    """g(v) = sum_i a_i v_i^2 + b_i v_i + c."""

    type: Literal["separable_quadratic"] = "separable_quadratic"
    a: Vector
    b: Vector
    c: FiniteReal = 0.0

    @model_validator(mode="after")
    def _convex(self) -> "SeparableQuadraticG":
        if len(self.a) != len(self.b):
            raise ValueError("separable_quadratic a and b must have equal length")
        if any(ai < 0 for ai in self.a):
            raise ValueError("separable_quadratic curvature a must be nonnegative")
        return self


class L1G(_Spec):
    """g(v) = weight * ||v||_1."""

    type: Literal["l1"] = "l1"
    weight: float

    @field_validator("weight")
    @classmethod
    def _nonnegative(cls, v: float) -> float:
        if not (math.isfinite(v) and v >= 0):
            raise ValueError("l1 weight must be nonnegative")
        return v


class SeparableCustomG(_Spec):
    """g(v) = sum_i f_i(v_i) with each f_i a registered convex scalar function."""

    type: Literal["custom1d"] = "custom1d"
    names: Tuple[str, ...]

    @field_validator("names")
    @classmethod
    def _registered(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        for name in v:
            get_function_1d(name)
        return v


GSpec = Annotated[
    Union[ZeroG, SeparableQuadraticG, L1G, SeparableCustomG], Field(discriminator="type")
]


# Sets omega


class WholeSpace(_Spec):
    type: Literal["whole_space"] = "whole_space"


class NonnegativeOrthant(_Spec):
    type: Literal["nonnegative"] = "nonnegative"


class Box(_Spec):
    """Componentwise bounds; infinite entries are written as null in documents."""

    type: Literal["box"] = "box"
    lo: LowerBounds
    hi: UpperBounds

    @model_validator(mode="after")
    def _nonempty(self) -> "Box":
        if len(self.lo) != len(self.hi) or len(self.lo) == 0:
            raise ValueError("box lo and hi must have equal, nonzero length")
        for lo, hi in zip(self.lo, self.hi):
            if math.isnan(lo) or math.isnan(hi) or lo == math.inf or hi == -math.inf:
                raise ValueError("box bounds must be real or outward infinite")
            if lo > hi:
                raise ValueError("empty box")
        return self

    @field_serializer("lo", "hi")
    def _infinite_as_null(self, values: Tuple[float, ...]) -> List[Optional[float]]:
        return [v if math.isfinite(v) else None for v in values]


class Ball(_Spec):
    type: Literal["ball"] = "ball"
    center: Vector
    radius: float

    @field_validator("radius")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0):
            raise ValueError("ball radius must be positive")
        return v


class Halfspace(_Spec):
    """{x : <normal, x> <= offset}."""

    type: Literal["halfspace"] = "halfspace"
    normal: Vector
    offset: FiniteReal

    @field_validator("normal")
    @classmethod
    def _nonzero(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not any(x != 0 for x in v):
            raise ValueError("halfspace normal must be nonzero")
        return v


SetSpec = Annotated[
    Union[WholeSpace, NonnegativeOrthant, Box, Ball, Halfspace], Field(discriminator="type")
]


def box_bounds(omega: Any, d: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Return (lo, hi) arrays when omega is box-like, None for Ball/Halfspace.

    WholeSpace and NonnegativeOrthant are boxes with infinite entries, so every
    box-like set shares one prox code path.
    """
    if isinstance(omega, WholeSpace):
        return np.full(d, -math.inf), np.full(d, math.inf)
    if isinstance(omega, NonnegativeOrthant):
        return np.zeros(d), np.full(d, math.inf)
    if isinstance(omega, Box):
        return np.array(omega.lo, dtype=float), np.array(omega.hi, dtype=float)
    return None


def _operator_dimension(op: Any) -> Optional[int]:
    if isinstance(op, AffineOperator):
        return op.dimension
    return None


def _g_dimension(g: Any) -> Optional[int]:
    if isinstance(g, SeparableQuadraticG):
        return len(g.a)
    if isinstance(g, SeparableCustomG):
        return len(g.names)
    return None


def _set_dimension(omega: Any) -> Optional[int]:
    if isinstance(omega, Box):
        return len(omega.lo)
    if isinstance(omega, Ball):
        return len(omega.center)
    if isinstance(omega, Halfspace):
        return len(omega.normal)
    return None


class ProblemInstance(_Spec):
    """A complete problem: dimension, F, h, g, omega and the prox parameter gamma."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    d: int = Field(alias="dimension")
    F: OperatorSpec
    h: OperatorSpec
    g: GSpec = Field(default_factory=ZeroG)
    omega: SetSpec = Field(default_factory=WholeSpace)
    gamma: float = 1.0

    @field_validator("d")
    @classmethod
    def _positive_dimension(cls, v: int) -> int:
        if v < 1:
            raise ValueError("dimension must be at least 1")
        return v

    @field_validator("gamma")
    @classmethod
    def _positive_gamma(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0):
            raise ValueError("gamma must be positive")
        return v

    @model_validator(mode="after")
    def _dimensions_agree(self) -> "ProblemInstance":
        parts = {
            "F": _operator_dimension(self.F),
            "h": _operator_dimension(self.h),
            "g": _g_dimension(self.g),
            "omega": _set_dimension(self.omega),
        }
        for name, dim in parts.items():
            if dim is not None and dim != self.d:
                raise DimensionMismatchError(
                    f"dimension mismatch: {name} has dimension {dim}, problem has {self.d}",
                    data={"field": name, "expected": self.d, "actual": dim},
                )
        return self


def as_vector(w: Union[Sequence[float], np.ndarray], d: Optional[int] = None) -> np.ndarray:
    """Convert to a 1-D float array, checking length and finiteness."""
    arr = np.asarray(w, dtype=float).reshape(-1)
    if d is not None and arr.shape[0] != d:
        raise DimensionMismatchError(
            f"dimension mismatch: vector has {arr.shape[0]} entries, expected {d}",
            data={"expected": d, "actual": int(arr.shape[0])},
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def eval_operator(op: Any, w: Union[Sequence[float], np.ndarray]) -> np.ndarray:
    """Evaluate an operator description at w.

    Args:
        op: AffineOperator, ScalarLinearOperator or CustomOperator
        w: Point of matching dimension

    Returns:
        M w + q, c w, or the registered function's value
    """
    x = np.asarray(w, dtype=float)
    if isinstance(op, AffineOperator):
        if x.shape != (op.dimension,):
            raise DimensionMismatchError(
                f"dimension mismatch: operator expects {op.dimension}, got {x.shape[0]}"
            )
        return op.matrix_array @ x + op.offset_array
    if isinstance(op, ScalarLinearOperator):
        return op.coefficient * x
    out = np.asarray(get_operator(op.name)(x), dtype=float)
    if out.shape != x.shape:
        raise DimensionMismatchError(
            f"dimension mismatch: custom operator {op.name} returned shape {out.shape}"
        )
    return out


def eval_rows(op: Any, rows: np.ndarray) -> np.ndarray:
    """Evaluate an operator on every row of a (n, d) array."""
    if isinstance(op, AffineOperator):
        return rows @ op.matrix_array.T + op.offset_array
    if isinstance(op, ScalarLinearOperator):
        return op.coefficient * rows
    fn = get_operator(op.name)
    return np.array([fn(row) for row in rows], dtype=float).reshape(rows.shape)


def operator_matrix(op: Any, d: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """(M, q) for affine-type operators, None for Custom."""
    if isinstance(op, AffineOperator):
        return op.matrix_array, op.offset_array
    if isinstance(op, ScalarLinearOperator):
        return op.coefficient * np.eye(d), np.zeros(d)
    return None


def _translate(error: ValidationError) -> ProblemLoadError:
    first = error.errors()[0]
    field = ".".join(str(part) for part in first["loc"]) or "<document>"
    return ProblemLoadError(f"{field}: {first['msg']}", data={"field": field})


def load_problem(document: Union[str, bytes, Dict[str, Any]]) -> ProblemInstance:
    """Parse and validate a problem document.

    Args:
        document: JSON text or an already-decoded mapping

    Returns:
        The validated ProblemInstance
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ProblemLoadError(f"Invalid JSON: {e}", data={"field": "<document>"})
    if not isinstance(document, dict):
        raise ProblemLoadError("Problem document must be a JSON object")
    try:
        return ProblemInstance.model_validate(document)
    except ValidationError as e:
        raise _translate(e) from e


def load_problem_file(path: Union[str, Path]) -> ProblemInstance:
    logger.info(f"Loading problem from {path}")
    return load_problem(Path(path).read_text(encoding="utf-8"))


def dump_problem(p: ProblemInstance) -> str:
    """Serialize to the problem document format (reloadable with load_problem)."""
    return json.dumps(p.model_dump(mode="json", by_alias=True), indent=2)


def builtin_example1() -> ProblemInstance:
    """The one-dimensional reference instance.

    h(w) = w/2, F(w) = 3w/4, g(w) = w^2 + 2w + 1, omega = [0, inf), gamma = 1.
    Its unique solution is w = 0.
    """
    return ProblemInstance(
        d=1,
        F=ScalarLinearOperator(coefficient=0.75),
        h=ScalarLinearOperator(coefficient=0.5),
        g=SeparableQuadraticG(a=(1.0,), b=(2.0,), c=1.0),
        omega=NonnegativeOrthant(),
        gamma=1.0,
    )


def builtin_affine5(seed: int = 0) -> ProblemInstance:
    """Seeded five-dimensional affine instance satisfying the standing assumptions.

    F = 0.9 I + 0.05 S with S skew-symmetric of unit spectral norm and h = 0.9 I, so
    sigma = 0.9, beta^2 = 0.8125, mu = 0.81, Lambda = 0.05, Gamma = 0.95, m = 0.85
    regardless of the seed.
    """
    d = 5
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d))
    skew = (a - a.T) / 2.0
    skew /= np.linalg.norm(skew, 2)
    m_f = 0.9 * np.eye(d) + 0.05 * skew
    return ProblemInstance(
        d=d,
        F=AffineOperator(
            matrix=tuple(tuple(row) for row in m_f.tolist()),
            offset=tuple(rng.uniform(-1.0, 1.0, d).tolist()),
        ),
        h=AffineOperator(
            matrix=tuple(tuple(row) for row in (0.9 * np.eye(d)).tolist()),
            offset=tuple(rng.uniform(-1.0, 1.0, d).tolist()),
        ),
        g=SeparableQuadraticG(
            a=tuple(rng.uniform(0.0, 1.0, d).tolist()),
            b=tuple(rng.uniform(-1.0, 1.0, d).tolist()),
            c=0.0,
        ),
        omega=NonnegativeOrthant(),
        gamma=1.0,
    )


BUILTIN_PROBLEMS: Dict[str, Callable[[], ProblemInstance]] = {
    "example1": builtin_example1,
    "affine5": builtin_affine5,
}


def load_builtin(name: str) -> ProblemInstance:
    try:
        factory = BUILTIN_PROBLEMS[name]
    except KeyError:
        raise ProblemLoadError(
            f"Unknown builtin problem: {name}",
            data={"field": "builtin", "choices": list(BUILTIN_PROBLEMS)},
        )
    return factory()
