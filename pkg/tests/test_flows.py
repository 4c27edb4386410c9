import math

import numpy as np
import pytest
from scipy.optimize import brentq

from pcipm import (BarrierField, EqualitySystem, FlowState, GainMatrix, IntegratorOptions,
                   ScheduleParams, TrackingProblem, equality_flow_field, fit_decay_rate,
                   initial_slack, integrate, interior_point_flow, interior_point_flow_field,
                   quadratic_field, switching_objective, two_agent_problem, unconstrained_flow,
                   unconstrained_flow_field)
from pcipm.errors import NotPositiveDefinite, StepCollapse
from pcipm.flows import newton_direction, sample_times
from pcipm.problem import moving_quadratic


class Field:
    """Plain callable vector field for integrator tests."""

    def __init__(self, fun):
        self.fun = fun

    def __call__(self, y, t):
        return self.fun(y, t)


def test_gain_validation():
    GainMatrix(np.diag([3.0, 5.0]), 3.0)
    with pytest.raises(ValueError):
        GainMatrix(np.diag([3.0, 5.0]), 4.0)
    with pytest.raises(ValueError):
        GainMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), 0.5)
    with pytest.raises(ValueError):
        GainMatrix.isotropic(0.0, 2)


def test_on_optimum_moves_with_optimum():
    v = np.array([0.3, -1.2])
    f0 = moving_quadratic(2, lambda t: t * v, lambda t: v)
    for t in (0.0, 0.4, 2.0):
        assert np.allclose(unconstrained_flow_field(f0, GainMatrix.isotropic(7.0, 2), t * v, t), v)


def test_static_norm_contracts():
    f0 = quadratic_field(2.0 * np.eye(3))
    x = np.array([1.0, -2.0, 0.5])
    assert np.allclose(unconstrained_flow_field(f0, GainMatrix.isotropic(4.0, 3), x, 0.0), -4.0 * x)


def test_moving_target_closed_form():
    y = lambda t: np.array([np.sin(t), t**2])
    yd = lambda t: np.array([np.cos(t), 2 * t])
    f0 = moving_quadratic(2, y, yd)
    P = np.array([[6.0, 1.0], [1.0, 4.0]])
    gain = GainMatrix(P, 3.0)
    x, t = np.array([0.4, -0.3]), 0.8
    assert np.allclose(unconstrained_flow_field(f0, gain, x, t), -P @ (x - y(t)) + yd(t))


def equality_problem(moving):
    if moving:
        eq = EqualitySystem(lambda t: np.array([[1.0, 1.0]]), lambda t: np.array([2.0 + t]),
                            lambda t: np.zeros((1, 2)), lambda t: np.array([1.0]))
    else:
        eq = EqualitySystem.static([[1.0, 1.0]], [2.0])
    return TrackingProblem(quadratic_field(2.0 * np.eye(2)), (), m=2.0, equality=eq)


def test_equality_flow_rest_at_kkt_point():
    v = equality_flow_field(equality_problem(False), GainMatrix.isotropic(5.0, 3), [1.0, 1.0, -2.0], 0.3)
    assert np.allclose(v, 0.0, atol=1e-14)


def test_equality_flow_keeps_feasibility():
    t = 0.6
    z = np.array([(2 + t) / 2, (2 + t) / 2, -(2 + t)])
    v = equality_flow_field(equality_problem(True), GainMatrix.isotropic(5.0, 3), z, t)
    assert np.isclose(v[0] + v[1], 1.0, rtol=1e-13)


def test_equality_residual_decays_at_sigma():
    from pcipm.flows import equality_flow
    flow = equality_flow(equality_problem(True), GainMatrix.isotropic(3.0, 3))
    res = integrate(flow, FlowState(0.0, np.zeros(2), lam=np.zeros(1)), 1.5,
                    IntegratorOptions(max_step=1e-3, sample_interval=0.01))
    t = np.array([s.t for s in res.samples])
    r = np.array([abs(s.x.sum() - (2 + s.t)) for s in res.samples])
    rate, r2 = fit_decay_rate(t, r)
    assert abs(rate - 3.0) <= 0.05 * 3.0 and r2 > 0.999


def test_interior_point_without_constraints_matches_unconstrained():
    f0 = moving_quadratic(2, lambda t: np.array([t, 1.0]), lambda t: np.array([1.0, 0.0]))
    B = BarrierField(TrackingProblem(f0), ScheduleParams())
    gain = GainMatrix.isotropic(3.0, 2)
    x = np.array([0.2, 0.1])
    assert np.array_equal(interior_point_flow_field(B, gain, x, 0.5), unconstrained_flow_field(f0, gain, x, 0.5))


def test_interior_point_rest_at_static_barrier_minimizer(one_d_upper):
    sched = ScheduleParams(c0=2.0, gamma_c=0.0, s0=0.3, alpha=0.0)
    B = BarrierField(one_d_upper, sched)
    # minimizer of x^2 - log(1.3 - x) / 2 by scalar root finding
    root = brentq(lambda v: 2 * v + 0.5 / (1.3 - v), -5.0, 1.2999, xtol=1e-15)
    v = interior_point_flow_field(B, GainMatrix.isotropic(10.0, 1), [root], 0.0)
    assert abs(v[0]) < 1e-12


def test_two_agent_first_step_stays_inside(paths):
    problem = two_agent_problem(paths)
    x0 = np.zeros(4)
    B = BarrierField(problem, ScheduleParams(s0=initial_slack(problem, x0)))
    v = interior_point_flow_field(B, GainMatrix.isotropic(50.0, 4), x0, 0.0)
    assert np.all(np.isfinite(v))
    assert B.in_domain(x0 + 0.01 * v, 0.01)


def test_regularized_retry():
    H = np.diag([1.0, 0.0])
    with pytest.raises(NotPositiveDefinite):
        newton_direction(H, np.ones(2))
    d, reg = newton_direction(H, np.array([1.0, 0.0]), regularize=True)
    assert reg and np.isclose(d[0], 1.0, rtol=1e-6)


def test_linear_decay_euler():
    res = integrate(Field(lambda y, t: -y), FlowState(0.0, [1.0]), 1.0, IntegratorOptions(max_step=1e-3))
    x1 = res.state.x[0]
    assert abs(x1 - math.exp(-1.0)) <= 1e-3
    assert np.isclose(x1, 0.999**1000, rtol=1e-12)
    assert res.state.step_count == 1000 and res.state.reject_count == 0


def test_zero_field_counts():
    res = integrate(Field(lambda y, t: np.zeros_like(y)), FlowState(0.0, [2.0, 3.0]), 1.0,
                    IntegratorOptions(max_step=0.01, sample_interval=0.1))
    assert np.array_equal(res.state.x, [2.0, 3.0])
    assert res.state.step_count == math.ceil(1.0 / 0.01)
    assert res.state.reject_count == 0
    assert len(res.samples) == 11
    assert np.allclose([s.t for s in res.samples], np.linspace(0, 1, 11), atol=1e-12)


def test_zero_horizon_single_sample():
    res = integrate(Field(lambda y, t: -y), FlowState(0.0, [1.0]), 0.0)
    assert len(res.samples) == 1 and res.state.step_count == 0


def test_sample_grid_count():
    assert sample_times(0.0, 1.0, 0.005).size == 201
    assert sample_times(0.0, 0.999, 0.005).size == 200


def test_integrator_options_invariants():
    with pytest.raises(ValueError):
        IntegratorOptions(max_step=1e-3, min_step=1e-2)
    with pytest.raises(ValueError):
        IntegratorOptions(shrink=1.0)


def test_slack_collapse_raises():
    # x^2 <= 1 from an infeasible start while the slack collapses within ~1e-6
    problem = TrackingProblem(quadratic_field([[2.0]], [-6.0]), [quadratic_field([[2.0]], None, -1.0)], m=2.0)
    x0 = np.array([2.0])
    B = BarrierField(problem, ScheduleParams(c0=1.0, gamma_c=0.0, s0=initial_slack(problem, x0), alpha=1e6))
    with pytest.raises(StepCollapse) as info:
        integrate(interior_point_flow(B, 1.0), FlowState(0.0, x0), 0.1, IntegratorOptions(min_step=1e-4))
    assert info.value.t == 0.0


class Guarded:
    """Wraps an interior-point flow and records every accepted state."""

    def __init__(self, flow):
        self.flow = flow
        self.accepted = []

    def __call__(self, y, t):
        return self.flow(y, t)

    def accept_step(self, y, t, y_new, t_new):
        ok = self.flow.accept_step(y, t, y_new, t_new)
        if ok:
            self.accepted.append((y_new.copy(), t_new))
        return ok


def test_accepted_states_stay_in_domain(paths):
    problem = two_agent_problem(paths)
    x0 = np.zeros(4)
    B = BarrierField(problem, ScheduleParams(s0=initial_slack(problem, x0)))
    g = Guarded(interior_point_flow(B, 50.0))
    integrate(g, FlowState(0.0, x0), 0.5)
    assert len(g.accepted) >= 50
    assert all(B.in_domain(y, t) for y, t in g.accepted)


def test_barrier_gradient_decays_at_sigma(paths):
    problem = two_agent_problem(paths)
    x0 = np.zeros(4)
    B = BarrierField(problem, ScheduleParams(s0=initial_slack(problem, x0)))
    res = integrate(interior_point_flow(B, 50.0), FlowState(0.0, x0), 0.2,
                    IntegratorOptions(max_step=1e-3, sample_interval=0.005))
    t = np.array([s.t for s in res.samples])
    g = np.array([np.linalg.norm(B.gradient(s.x, s.t)) for s in res.samples])
    rate, _ = fit_decay_rate(t, g)
    assert abs(rate - 50.0) <= 0.1 * 50.0


def test_gradient_law_on_switching_scenario(paths):
    problem = switching_objective(paths)
    f0 = problem.objective
    x0 = np.zeros(2)
    res = integrate(unconstrained_flow(problem, 10.0), FlowState(0.0, x0), 0.5,
                    IntegratorOptions(max_step=1e-3))
    g0 = np.linalg.norm(f0.gradient(x0, 0.0))
    ratio = [np.linalg.norm(f0.gradient(s.x, s.t)) / (g0 * np.exp(-10.0 * s.t)) for s in res.samples]
    assert 0.9 <= min(ratio) and max(ratio) <= 1.1
