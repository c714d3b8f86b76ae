"""
Problem constants: exact values for affine problems, empirical estimates for
everything else, the derived quantities Gamma, Lambda and m, and the verdict.
"""

import logging
import math
from typing import Annotated, Any, Dict, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .exceptions import ConfigError
from .model import ProblemInstance, eval_rows, operator_matrix
from .utils import json_real

logger = logging.getLogger(__name__)

# radicands in (-RADICAND_SLACK, 0) are rounding noise and treated as 0
RADICAND_SLACK = 1e-12

OVERRIDABLE = ("alpha", "lambda", "mu", "rho", "beta", "sigma")


class ExactAffineSource(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["exact_affine"] = "exact_affine"
    overridden: Tuple[str, ...] = ()


class EmpiricalSource(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["empirical"] = "empirical"
    samples: int
    radius: float
    seed: int
    overridden: Tuple[str, ...] = ()


ConstantsSource = Annotated[Union[ExactAffineSource, EmpiricalSource], Field(discriminator="kind")]


class ConstantsReport(BaseModel):
    """Problem constants plus the derived Gamma, Lambda and m.

    Gamma, Lambda and m are None when beta^2 + alpha^2 - 2 mu is negative; such a
    report is invalid and ``message`` says why.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    alpha: float
    lambda_mono: float = Field(alias="lambda")
    mu: float
    rho: float
    beta: float
    sigma: float
    gamma_const: Optional[float] = Field(default=None, alias="Gamma")
    lambda_const: Optional[float] = Field(default=None, alias="Lambda")
    m: Optional[float] = None
    source: ConstantsSource = Field(default_factory=ExactAffineSource)
    message: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.lambda_const is not None

    @property
    def printed_modulus(self) -> Optional[float]:
        """rho - Lambda, the lower-bound constant as originally published."""
        if self.lambda_const is None:
            return None
        return self.rho - self.lambda_const


class AssumptionVerdict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    cond_iii_lhs: float
    cond_iii_pass: bool
    cond_iv_pass: bool
    contraction_pass: bool
    margins: Dict[str, float]
    message: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.cond_iii_pass and self.cond_iv_pass and self.contraction_pass


def _clamped_sqrt(radicand: float) -> Optional[float]:
    if radicand < -RADICAND_SLACK:
        return None
    return math.sqrt(max(radicand, 0.0))


def build_report(
    alpha: float,
    lambda_mono: float,
    mu: float,
    rho: float,
    beta: float,
    sigma: float,
    source: Any = None,
) -> ConstantsReport:
    """Assemble a report, filling Gamma = Lambda + alpha, Lambda and m = sigma - Lambda."""
    radicand = beta * beta + alpha * alpha - 2.0 * mu
    big_lambda = _clamped_sqrt(radicand)
    fields: Dict[str, Any] = dict(
        alpha=alpha,
        lambda_mono=lambda_mono,
        mu=mu,
        rho=rho,
        beta=beta,
        sigma=sigma,
        source=source if source is not None else ExactAffineSource(),
    )
    if big_lambda is None:
        fields["message"] = f"negative radicand beta^2 + alpha^2 - 2 mu = {radicand:.6g}"
        logger.warning(f"Invalid constants: {fields['message']}")
    else:
        fields.update(gamma_const=big_lambda + alpha, lambda_const=big_lambda, m=sigma - big_lambda)
    return ConstantsReport(**fields)


def _sym_min_eig(a: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (a + a.T)).min())


def _cocoercivity(m_f: np.ndarray) -> float:
    """inf over x with Mx != 0 of <Mx, x> / ||Mx||^2.

    With y = Mx the ratio is <y, M^+ y> / ||y||^2 on the range of M, so the
    infimum is the smallest eigenvalue of sym(M^+) restricted to that range.
    """
    u, s, _ = np.linalg.svd(m_f)
    rank = int(np.sum(s > s.max() * 1e-12)) if s.size and s.max() > 0 else 0
    if rank == 0:
        return math.inf
    if rank == m_f.shape[0]:
        return _sym_min_eig(np.linalg.inv(m_f))
    basis = u[:, :rank]
    restricted = basis.T @ np.linalg.pinv(m_f) @ basis
    return _sym_min_eig(restricted)


def exact_constants_affine(p: ProblemInstance) -> ConstantsReport:
    """Closed-form constants for affine F and h.

    Example 1 gives alpha = lambda = 0.5, mu = 0.375, beta = sigma = 0.75, rho = 4/3,
    hence Lambda = 0.25, Gamma = 0.75, m = 0.5.
    """
    f = operator_matrix(p.F, p.d)
    h = operator_matrix(p.h, p.d)
    if f is None or h is None:
        raise ConfigError(
            "Exact constants need affine F and h; use estimate_constants for custom operators"
        )
    m_f, _ = f
    m_h, _ = h
    return build_report(
        alpha=float(np.linalg.norm(m_h, 2)),
        lambda_mono=_sym_min_eig(m_h),
        mu=_sym_min_eig(m_f.T @ m_h),
        rho=_cocoercivity(m_f),
        beta=float(np.linalg.norm(m_f, 2)),
        sigma=_sym_min_eig(m_f),
        source=ExactAffineSource(),
    )


def _rowdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", a, b)


def estimate_constants(
    p: ProblemInstance, n_samples: int = 10_000, radius: float = 100.0, seed: int = 0
) -> ConstantsReport:
    """Empirical constants from random pairs in the box [-radius, radius]^d.

    Suprema are sample maxima and infima sample minima, so on affine problems the
    estimates never overstate how well-conditioned the problem is.
    """
    if n_samples < 2:
        raise ConfigError(
            "estimate_constants needs at least 2 samples", data={"n_samples": n_samples}
        )
    if radius <= 0:
        raise ConfigError("sampling radius must be positive", data={"radius": radius})
    rng = np.random.default_rng(seed)
    u = rng.uniform(-radius, radius, (n_samples, p.d))
    v = rng.uniform(-radius, radius, (n_samples, p.d))
    diff = u - v
    sq = _rowdot(diff, diff)
    keep = sq > 1e-28
    if not np.any(keep):
        raise ConfigError("degenerate sampling: all sample pairs coincide")
    diff, sq, u, v = diff[keep], sq[keep], u[keep], v[keep]
    logger.debug(f"Estimating constants from {int(keep.sum())} pairs, radius {radius}, seed {seed}")

    d_f = eval_rows(p.F, u) - eval_rows(p.F, v)
    d_h = eval_rows(p.h, u) - eval_rows(p.h, v)
    norm = np.sqrt(sq)
    f_sq = _rowdot(d_f, d_f)
    f_inner = _rowdot(d_f, diff)
    moving = f_sq >= 1e-28

    return build_report(
        alpha=float(np.max(np.linalg.norm(d_h, axis=1) / norm)),
        lambda_mono=float(np.min(_rowdot(d_h, diff) / sq)),
        mu=float(np.min(_rowdot(d_f, d_h) / sq)),
        rho=float(np.min(f_inner[moving] / f_sq[moving])) if np.any(moving) else math.inf,
        beta=float(np.max(np.sqrt(f_sq) / norm)),
        sigma=float(np.min(f_inner / sq)),
        source=EmpiricalSource(samples=n_samples, radius=radius, seed=seed),
    )


def constants_for(
    p: ProblemInstance, n_samples: int = 10_000, radius: float = 100.0, seed: int = 0
) -> ConstantsReport:
    """Exact constants when F and h are affine, empirical ones otherwise."""
    if operator_matrix(p.F, p.d) is not None and operator_matrix(p.h, p.d) is not None:
        return exact_constants_affine(p)
    return estimate_constants(p, n_samples=n_samples, radius=radius, seed=seed)


def with_overrides(r: ConstantsReport, overrides: Mapping[str, float]) -> ConstantsReport:
    """Replace base constants (keys alpha, lambda, mu, rho, beta, sigma) and rederive."""
    unknown = sorted(set(overrides) - set(OVERRIDABLE))
    if unknown:
        raise ConfigError(
            f"Unknown constant override(s): {', '.join(unknown)}",
            data={"allowed": list(OVERRIDABLE)},
        )
    base = {
        "alpha": r.alpha,
        "lambda": r.lambda_mono,
        "mu": r.mu,
        "rho": r.rho,
        "beta": r.beta,
        "sigma": r.sigma,
    }
    base.update({k: float(v) for k, v in overrides.items()})
    marked = tuple(sorted(set(r.source.overridden) | set(overrides)))
    return build_report(
        alpha=base["alpha"],
        lambda_mono=base["lambda"],
        mu=base["mu"],
        rho=base["rho"],
        beta=base["beta"],
        sigma=base["sigma"],
        source=r.source.model_copy(update={"overridden": marked}),
    )


def check_assumption_a(r: ConstantsReport) -> AssumptionVerdict:
    """Conditions (iii), (iv) and the contraction criterion m > 0.

    Example 1: lhs = 0.25 + 0.5 = 0.75, every condition passes.
    """
    messages = []
    first = _clamped_sqrt(r.beta**2 + r.alpha**2 - 2.0 * r.mu)
    second = _clamped_sqrt(1.0 - 2.0 * r.lambda_mono + r.alpha**2)
    if first is None:
        messages.append("negative radicand beta^2 + alpha^2 - 2 mu")
    if second is None:
        messages.append("negative radicand 1 - 2 lambda + alpha^2")
    if first is None or second is None or r.lambda_const is None or r.m is None:
        return AssumptionVerdict(
            cond_iii_lhs=math.inf,
            cond_iii_pass=False,
            cond_iv_pass=False,
            contraction_pass=False,
            margins={},
            message="invalid report: " + "; ".join(messages or [r.message or "missing constants"]),
        )
    lhs = first + second
    return AssumptionVerdict(
        cond_iii_lhs=lhs,
        cond_iii_pass=lhs < 1.0,
        cond_iv_pass=r.rho > r.lambda_const,
        contraction_pass=r.m > 0.0,
        margins={
            "cond_iii": 1.0 - lhs,
            "cond_iv": r.rho - r.lambda_const,
            "contraction": r.m,
        },
    )


def report_document(
    r: ConstantsReport, verdict: Optional[AssumptionVerdict] = None
) -> Dict[str, Any]:
    """JSON document with keys alpha, lambda, mu, rho, beta, sigma, Gamma, Lambda, m,
    source and verdict."""
    verdict = verdict if verdict is not None else check_assumption_a(r)
    verdict_doc: Dict[str, Any] = {
        "cond_iii_lhs": json_real(verdict.cond_iii_lhs),
        "cond_iii_pass": verdict.cond_iii_pass,
        "cond_iv_pass": verdict.cond_iv_pass,
        "contraction_pass": verdict.contraction_pass,
        "passed": verdict.passed,
        "margins": {k: json_real(v) for k, v in verdict.margins.items()},
        "printed_modulus": json_real(r.printed_modulus),
    }
    if verdict.message:
        verdict_doc["message"] = verdict.message
    return {
        "alpha": json_real(r.alpha),
        "lambda": json_real(r.lambda_mono),
        "mu": json_real(r.mu),
        "rho": json_real(r.rho),
        "beta": json_real(r.beta),
        "sigma": json_real(r.sigma),
        "Gamma": json_real(r.gamma_const),
        "Lambda": json_real(r.lambda_const),
        "m": json_real(r.m),
        "source": r.source.model_dump(mode="json"),
        "verdict": verdict_doc,
    }
