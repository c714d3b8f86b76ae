"""Tests for the backward map and the residual."""

import numpy as np
import pytest

from gimvip.exceptions import DimensionMismatchError
from gimvip.model import eval_operator
from gimvip.proxcat import ProxMethod, contains, g_value
from gimvip.residual import ResidualMap, b_map, xi


def test_example_residual_values(example1):
    assert xi(example1, [0.0]).xi_norm == 0.0
    assert xi(example1, [12.0]).xi[0] == pytest.approx(26.0 / 3.0)
    assert xi(example1, [-4.0]).xi[0] == pytest.approx(-3.0)


def test_example_backward_map(example1):
    assert b_map(example1, [12.0])[0] == pytest.approx(1.0 / 3.0)
    assert b_map(example1, [0.0])[0] == 0.0
    assert b_map(example1, [-4.0])[0] == 0.0


@pytest.mark.parametrize("w", [8.0, 20.0, 1e3])
def test_example_residual_is_affine_beyond_the_kink(example1, w):
    assert xi(example1, [w]).xi[0] == pytest.approx(2.0 * w / 3.0 + 2.0 / 3.0)


@pytest.mark.parametrize("w", [0.5, 3.0, 7.9])
def test_example_residual_below_the_kink(example1, w):
    assert xi(example1, [w]).xi[0] == pytest.approx(0.75 * w)


def test_backward_map_is_feasible(affine5, rng):
    rmap = ResidualMap(affine5)
    for w in rng.uniform(-100, 100, (200, 5)):
        assert contains(affine5.omega, rmap.b(w))


def test_residual_norm_is_nonnegative(l1_box3, rng):
    rmap = ResidualMap(l1_box3)
    for w in rng.uniform(-10, 10, (200, 3)):
        sample = rmap.evaluate(w)
        assert sample.xi_norm >= 0.0
        assert sample.xi_norm == pytest.approx(float(np.linalg.norm(sample.xi)))


def test_forced_bisection_agrees(l1_box3, rng):
    closed = ResidualMap(l1_box3)
    bisect = ResidualMap(l1_box3, prox_method=ProxMethod.BISECTION)
    for w in rng.uniform(-5, 5, (100, 3)):
        assert np.allclose(closed.evaluate(w).xi, bisect.evaluate(w).xi, atol=1e-9)


def test_dimension_checked(example1):
    with pytest.raises(DimensionMismatchError):
        xi(example1, [1.0, 2.0])


@pytest.mark.parametrize("w", [[1.0, 2.0], []], ids=["too_long", "empty"])
def test_residual_map_rejects_wrong_dimension(example1, w):
    with pytest.raises(DimensionMismatchError) as excinfo:
        ResidualMap(example1).evaluate(w)
    assert excinfo.value.data["expected"] == 1


def test_residual_map_rejects_short_point(affine5):
    with pytest.raises(DimensionMismatchError):
        ResidualMap(affine5).evaluate(np.zeros(3))


def variational_gap(p, w, v):
    """<h(w), v - F(w)> + g(v) - g(F(w)); nonnegative for every v in omega at a solution."""
    f = eval_operator(p.F, w)
    return float(eval_operator(p.h, w) @ (v - f) + g_value(p.g, v) - g_value(p.g, f))


@pytest.mark.parametrize("name", ["example1", "affine5"])
def test_zero_residual_characterizes_solutions(request, name, rng):
    p = request.getfixturevalue(name)
    wbar = request.getfixturevalue(f"{name}_wbar")
    rmap = ResidualMap(p)

    # at the solution: F(wbar) is feasible and no feasible v has a negative gap
    assert rmap.evaluate(wbar).xi_norm <= 1e-12
    assert contains(p.omega, eval_operator(p.F, wbar), tol=1e-10)
    for v in np.abs(rng.normal(0.0, 10.0, (500, p.d))):
        assert variational_gap(p, wbar, v) >= -1e-8

    # away from it: either F(w) is infeasible or v = B(w) has gap <= -||Xi(w)||^2
    for w in rng.uniform(-50.0, 50.0, (500, p.d)):
        sample = rmap.evaluate(w)
        assert sample.xi_norm > 0.0
        if contains(p.omega, eval_operator(p.F, w), tol=0.0):
            gap = variational_gap(p, w, sample.b)
            assert gap <= -(sample.xi_norm**2) + 1e-9
