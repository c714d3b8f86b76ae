"""Acceptance runs on the shipped problems: reference solution, published iterates,
settling bounds, Lyapunov monitoring and the discrete envelope."""

import numpy as np
import pytest

from gimvip.adapter import auto_gd, fixed_regime
from gimvip.certify import (
    a_coefficients,
    check_diff_inequality,
    check_lemma_bdt,
    check_lyapunov_decrease,
    discrete_certificate,
    envelope_horizon,
    finite_time_bound,
    symmetric_chi,
)
from gimvip.flow import (
    FiniteTimeRegime,
    FixedTimeParams,
    FixedTimeRegime,
    IntegratorConfig,
    IntegratorScheme,
    NominalRegime,
    integrate,
)
from gimvip.iterate import Alg2Method, ConstantSchedule, Eq29Method, HarmonicSchedule, run

from .conftest import FIXED_GAINS

ITERS = 150


def test_reference_solution_is_zero(example1_wbar):
    assert abs(example1_wbar[0]) <= 1e-12


@pytest.mark.parametrize("k3", [1.0, 0.0], ids=["k3_1", "k3_0"])
def test_eq29_reaches_solution(example1, example1_wbar, k3):
    method = Eq29Method(
        schedule=HarmonicSchedule(theta_min=1e-4),
        params=FixedTimeParams(**{**FIXED_GAINS, "k3": k3}),
        n_max=ITERS,
    )
    traj = run(example1, method, [50.0], example1_wbar)
    assert abs(traj.final.w[0]) <= 1e-3


def test_alg2_quadratic_exponent(example1):
    traj = run(example1, Alg2Method(tau=1.0, theta=0.2, k=2.0, n_max=ITERS), [50.0])
    assert abs(traj.final.w[0]) <= 1e-2


def test_alg2_cubic_exponent_stays_bounded(example1):
    traj = run(example1, Alg2Method(tau=1.0, theta=0.2, k=3.0, n_max=ITERS), [50.0])
    assert np.all(np.abs(traj.states()[:, 0]) <= 50.0)
    assert abs(traj.final.w[0]) <= 2.5


@pytest.mark.slow
def test_finite_time_settles_within_bound(example1, example1_constants):
    ic = IntegratorConfig(
        scheme=IntegratorScheme.RK4_FIXED, dt=1e-3, t_max=40.0, settle_tol=1e-8, sample_stride=100
    )
    traj = integrate(example1, FiniteTimeRegime(tau=1.0, k=3.0), [50.0], ic, example1_constants)
    bound = finite_time_bound(50.0, 1.0, 3.0, example1_constants.m)
    assert bound == pytest.approx(20.0)
    assert traj.settled_at is not None
    assert traj.settled_at <= bound


@pytest.mark.slow
@pytest.mark.parametrize("td", [1.0, 5.0])
@pytest.mark.parametrize("w0", [50.0, 1e3, 1e6])
def test_predefined_time_is_independent_of_start(example1, example1_constants, td, w0):
    params = auto_gd(FixedTimeParams(**{**FIXED_GAINS, "k3": 0.0, "Td": td}), example1_constants)
    ic = IntegratorConfig(dt=1e-4, t_max=td, settle_tol=1e-8, sample_stride=100)
    traj = integrate(example1, fixed_regime(params), [w0], ic, example1_constants)
    assert traj.settled_at is not None
    assert traj.settled_at <= td


REGIMES = [
    NominalRegime(kappa=1.0),
    FiniteTimeRegime(tau=1.0, k=3.0),
    FixedTimeRegime(**FIXED_GAINS),
]


@pytest.mark.parametrize("regime", REGIMES, ids=["nominal", "finite", "fixed"])
@pytest.mark.parametrize("name", ["example1", "affine5"])
def test_lyapunov_decreases_until_settling(request, regime, name):
    problem = request.getfixturevalue(name)
    constants = request.getfixturevalue(f"{name}_constants")
    wbar = request.getfixturevalue(f"{name}_wbar")
    ic = IntegratorConfig(dt=1e-2, t_max=60.0, settle_tol=1e-8)
    traj = integrate(problem, regime, np.full(problem.d, 10.0), ic, constants)
    assert traj.settled_at is not None
    check = check_lyapunov_decrease(traj, wbar)
    assert check.passed, check.worst_violation


@pytest.mark.parametrize("name", ["example1", "affine5"])
def test_residual_inequalities(request, name):
    problem = request.getfixturevalue(name)
    constants = request.getfixturevalue(f"{name}_constants")
    wbar = request.getfixturevalue(f"{name}_wbar")
    extra = [[12.0]] if problem.d == 1 else []
    checks = {
        c.name: c
        for c in check_lemma_bdt(problem, constants, wbar, n_samples=10_000, extra_points=extra)
    }
    for check_name, check in checks.items():
        if not check.informational:
            assert check.passed, (check_name, check.worst_violation)
    if problem.d == 1:
        assert not checks["residual_lower_printed"].passed


@pytest.mark.slow
def test_discrete_envelope_holds(example1, example1_constants, example1_wbar):
    params = FixedTimeParams(**{**FIXED_GAINS, "k1": 0.5, "k2": 1.5})
    chi = symmetric_chi(params)
    assert chi == pytest.approx(4.0)
    a1, a2 = a_coefficients(params, example1_constants.m, example1_constants.gamma_const)
    n_star = envelope_horizon(a1, a2, chi, 1e-3)
    method = Eq29Method(schedule=ConstantSchedule(theta=1e-3), params=params, n_max=n_star)
    traj = run(example1, method, [50.0], example1_wbar)
    cert = discrete_certificate(example1, method, traj, example1_constants, example1_wbar)
    assert cert.predicted_bound == float(n_star)
    checks = {c.name: c for c in cert.checks}
    assert checks["discrete_envelope"].passed, checks["discrete_envelope"].worst_violation
    assert cert.bound_respected


def test_fixed_time_differential_inequality(example1, example1_constants, example1_wbar):
    regime = FixedTimeRegime(**FIXED_GAINS)
    ic = IntegratorConfig(dt=1e-3, t_max=20.0, settle_tol=1e-8)
    traj = integrate(example1, regime, [50.0], ic, example1_constants)
    a1, a2 = a_coefficients(regime, example1_constants.m, example1_constants.gamma_const)
    s1, s2 = (1.0 + regime.k1) / 2.0, (1.0 + regime.k2) / 2.0
    check = check_diff_inequality(traj, example1_wbar, a1, a2, s1, s2, slack_rel=0.05)
    assert check.passed, check.worst_violation
    assert check.samples > 100
