"""Tests for bounds, envelopes, monitors and certificate reports."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gimvip.certify import (
    a_coefficients,
    bound_respected,
    check_diff_inequality,
    check_lemma_bdt,
    check_lyapunov_decrease,
    continuous_envelope,
    discrete_certificate,
    discrete_envelope,
    envelope_horizon,
    finite_time_bound,
    finite_time_lyapunov_bound,
    fixed_time_bound,
    flow_bounds,
    flow_certificate,
    predefined_bound,
    predefined_gain,
    predefined_gd,
    reference_solution,
    symmetric_chi,
)
from gimvip.exceptions import ConfigError, InvalidConstantsError, NonConvergenceError
from gimvip.flow import (
    FiniteTimeRegime,
    FixedTimeParams,
    FixedTimeRegime,
    IntegratorConfig,
    NominalRegime,
    integrate,
)
from gimvip.iterate import Alg2Method, run
from gimvip.regimes import build_report
from gimvip.residual import xi
from gimvip.trajectory import Trajectory, TrajectorySample
from gimvip.utils import safe_json_dumps

from .conftest import FIXED_GAINS


def scalar_trajectory(points, settled_at=None):
    traj = Trajectory(settled_at=settled_at)
    for t, w in points:
        traj.append(TrajectorySample(t=t, w=np.array([w]), xi_norm=abs(w)))
    return traj


class TestBoundRespected:
    def test_observed(self):
        assert bound_respected(2.0, 1.5, 10.0)
        assert not bound_respected(2.0, 2.5, 10.0)

    def test_unobserved(self):
        assert bound_respected(2.0, None, 1.0)
        assert not bound_respected(2.0, None, 3.0)
        assert bound_respected(math.inf, None, 150.0)


class TestBoundFormulas:
    def test_finite_time_bound(self):
        assert finite_time_bound(50.0, 1.0, 3.0, 0.5) == pytest.approx(20.0)

    def test_finite_time_lyapunov_bound(self):
        assert finite_time_lyapunov_bound(4.0, 2.0, 0.5) == pytest.approx(2.0)
        assert finite_time_lyapunov_bound(0.0, 2.0, 0.5) == 0.0

    def test_fixed_time_bound_generic(self):
        assert fixed_time_bound(1.0, 1.0, 0.5, 1.25) == pytest.approx(2.0 + 4.0)

    def test_fixed_time_bound_symmetric(self):
        assert fixed_time_bound(1.0, 1.0, 0.75, 1.25) == pytest.approx(2.0 * math.pi)

    def test_predefined_gain_limit(self):
        limit = 1.0 / (2.0 * 0.5) + 1.0 / (4.0 * 0.5)
        assert predefined_gain(2.0, 4.0, 0.0, 0.5, 1.5) == pytest.approx(limit)
        assert predefined_gain(2.0, 4.0, 1e-9, 0.5, 1.5) == pytest.approx(limit)

    def test_predefined_gd_example(self):
        gd = predefined_gd(0.9, 0.5, 1e-4, 0.4, 1.5, 0.5, 0.75)
        assert gd == pytest.approx(13.35, abs=0.01)

    @settings(max_examples=50, deadline=None)
    @given(
        a1=st.floats(min_value=0.05, max_value=5.0),
        a2=st.floats(min_value=0.05, max_value=5.0),
        factor=st.floats(min_value=1.1, max_value=10.0),
    )
    def test_predefined_gd_decreases_with_gains(self, a1, a2, factor):
        base = predefined_gd(a1, a2, 1e-4, 0.4, 1.5, 0.5, 0.75)
        assert predefined_gd(a1 * factor, a2, 1e-4, 0.4, 1.5, 0.5, 0.75) < base
        assert predefined_gd(a1, a2 * factor, 1e-4, 0.4, 1.5, 0.5, 0.75) < base

    def test_predefined_bound_scales_with_gain(self):
        gd = predefined_gd(0.9, 0.5, 1e-4, 0.4, 1.5, 0.5, 0.75)
        fp = FixedTimeParams(**{**FIXED_GAINS, "Gd": gd, "Td": 5.0})
        assert predefined_bound(fp, 0.5, 0.75) == pytest.approx(5.0)
        slow = fp.model_copy(update={"Gd": gd / 2.0})
        assert predefined_bound(slow, 0.5, 0.75) == pytest.approx(10.0)
        chattering = fp.model_copy(update={"k3": 0.5})
        assert predefined_bound(chattering, 0.5, 0.75) == math.inf

    def test_a_coefficients(self):
        fp = FixedTimeParams(**{**FIXED_GAINS, "k1": 0.5})
        a1, a2 = a_coefficients(fp, 0.5, 0.75)
        assert a1 == pytest.approx(0.874, abs=1e-3)
        assert a2 == pytest.approx(0.420, abs=1e-3)


class TestEnvelopes:
    def test_symmetric_chi(self):
        assert symmetric_chi(FixedTimeParams(**{**FIXED_GAINS, "k1": 0.5})) == pytest.approx(4.0)
        assert symmetric_chi(FixedTimeParams(**FIXED_GAINS)) is None

    def test_horizon(self):
        assert envelope_horizon(0.874, 0.420, 4.0, 1e-3) == pytest.approx(10367, abs=10)

    def test_discrete_envelope_shape(self):
        n_star = envelope_horizon(1.0, 1.0, 4.0, 0.1)
        assert discrete_envelope(0, 1.0, 1.0, 4.0, 0.1, 0.01) == math.inf
        assert discrete_envelope(n_star, 1.0, 1.0, 4.0, 0.1, 0.01) == 0.01
        values = [discrete_envelope(n, 1.0, 1.0, 4.0, 0.1, 0.01) for n in range(1, n_star)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert all(v > 0.01 for v in values)

    def test_continuous_envelope(self):
        assert continuous_envelope(0.0, 1.0, 1.0, 4.0) == math.inf
        assert continuous_envelope(2.0 * math.pi, 1.0, 1.0, 4.0) == 0.0
        assert continuous_envelope(1.0, 1.0, 1.0, 4.0) > continuous_envelope(2.0, 1.0, 1.0, 4.0)


class TestReferenceSolution:
    def test_example(self, example1_wbar):
        assert abs(example1_wbar[0]) <= 1e-12

    def test_affine5(self, affine5, affine5_wbar):
        assert xi(affine5, affine5_wbar).xi_norm <= 1e-12

    @pytest.mark.parametrize("name", ["example1", "affine5"])
    def test_idempotent(self, request, name):
        p = request.getfixturevalue(name)
        constants = request.getfixturevalue(f"{name}_constants")
        wbar = request.getfixturevalue(f"{name}_wbar")
        again = reference_solution(p, constants, w0=wbar)
        assert np.allclose(again, wbar, rtol=0.0, atol=1e-11)
        assert xi(p, again).xi_norm <= 1e-12

    def test_requires_positive_modulus(self, example1):
        r = build_report(alpha=0.5, lambda_mono=0.5, mu=0.375, rho=1.0, beta=0.75, sigma=0.2)
        with pytest.raises(InvalidConstantsError):
            reference_solution(example1, r)

    def test_iteration_cap(self, affine5, affine5_constants):
        with pytest.raises(NonConvergenceError):
            reference_solution(affine5, affine5_constants, w0=np.full(5, 50.0), max_iter=3)


class TestMonitors:
    def test_lyapunov_decrease(self):
        good = scalar_trajectory([(0.0, 4.0), (1.0, 2.0), (2.0, 1.0)])
        assert check_lyapunov_decrease(good, [0.0]).passed
        bad = scalar_trajectory([(0.0, 4.0), (1.0, 5.0), (2.0, 1.0)])
        check = check_lyapunov_decrease(bad, [0.0])
        assert not check.passed
        assert check.worst_violation == pytest.approx(4.5)

    def test_lyapunov_decrease_ignores_settled_tail(self):
        traj = scalar_trajectory([(0.0, 4.0), (1.0, 0.0), (2.0, 1e-3)], settled_at=1.0)
        assert check_lyapunov_decrease(traj, [0.0]).passed

    def test_diff_inequality_needs_three_samples(self):
        traj = scalar_trajectory([(0.0, 4.0), (1.0, 2.0)])
        with pytest.raises(ConfigError):
            check_diff_inequality(traj, [0.0], 1.0, 1.0, 0.5, 1.5)

    def test_diff_inequality_on_exponential_decay(self):
        # V = 0.5 exp(-2t) satisfies dV/dt = -2V
        points = [(t, math.exp(-t)) for t in np.linspace(0.0, 5.0, 501)]
        traj = scalar_trajectory(points)
        assert check_diff_inequality(traj, [0.0], 1.0, 1.0, 1.0, 1.0).passed
        assert not check_diff_inequality(traj, [0.0], 2.0, 2.0, 1.0, 1.0).passed

    def test_diff_inequality_fails_on_constant_state(self):
        traj = scalar_trajectory([(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)])
        check = check_diff_inequality(traj, [0.0], 1.0, 1.0, 0.5, 1.5)
        assert not check.passed
        assert check.samples == 1

    def test_lemma_checks_on_example(self, example1, example1_constants, example1_wbar):
        checks = {
            c.name: c
            for c in check_lemma_bdt(
                example1, example1_constants, example1_wbar, n_samples=2000, extra_points=[[12.0]]
            )
        }
        regular = ("lipschitz", "b_contraction", "residual_upper", "residual_lower", "correlation")
        for name in regular:
            assert checks[name].passed, name
            assert not checks[name].informational
        assert checks["residual_lower_printed"].informational
        assert not checks["residual_lower_printed"].passed
        # 13/12 * 12 - 26/3 at w = 12
        assert checks["residual_lower_printed"].worst_violation >= 13.0 - 26.0 / 3.0 - 1e-9

    def test_lemma_checks_need_valid_constants(self, example1, example1_wbar):
        r = build_report(alpha=0.1, lambda_mono=0.1, mu=1.0, rho=1.0, beta=0.1, sigma=1.0)
        with pytest.raises(InvalidConstantsError):
            check_lemma_bdt(example1, r, example1_wbar, n_samples=10)


class TestCertificates:
    def test_nominal_bound(self, example1_constants):
        bounds = flow_bounds(NominalRegime(kappa=1.0), 50.0, example1_constants, 1e-9)
        assert bounds["exponential"] == pytest.approx(math.log(0.75 * 50.0 / 1e-9) / 0.5)

    def test_fixed_bounds_include_predefined(self, example1_constants):
        regime = FixedTimeRegime(**FIXED_GAINS)
        bounds = flow_bounds(regime, 50.0, example1_constants, 1e-9)
        assert set(bounds) == {"fixed_time", "predefined_time"}
        assert bounds["predefined_time"] == pytest.approx(13.35, abs=0.01)

    def test_finite_time_certificate(self, example1, example1_constants, example1_wbar):
        regime = FiniteTimeRegime(tau=1.0, k=3.0)
        ic = IntegratorConfig(dt=1e-2, t_max=40.0, settle_tol=1e-8)
        traj = integrate(example1, regime, [50.0], ic, example1_constants)
        cert = flow_certificate(example1, regime, traj, example1_constants, example1_wbar, 1e-8)
        assert cert.kind == "flow"
        assert cert.predicted_bound == pytest.approx(20.0, rel=1e-6)
        assert cert.observed == traj.settled_at
        assert cert.bound_respected
        assert cert.all_checks_pass
        document = json.loads(safe_json_dumps(cert.document()))
        assert document["bounds"]["finite_time"] == pytest.approx(20.0, rel=1e-6)
        assert document["constants_used"]["m"] == pytest.approx(0.5)

    def test_discrete_certificate_without_envelope(
        self, example1, example1_constants, example1_wbar
    ):
        method = Alg2Method(n_max=150)
        traj = run(example1, method, [50.0], example1_wbar)
        cert = discrete_certificate(example1, method, traj, example1_constants, example1_wbar)
        assert cert.predicted_bound == math.inf
        assert cert.bound_respected
        assert cert.document()["predicted_bound"] == "inf"
