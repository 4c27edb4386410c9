import numpy as np
import pytest
from scipy.optimize import brentq

from pcipm import (BarrierField, EqualitySystem, ScheduleParams, TrackingProblem, affine_field,
                   evaluate_bounds, quadratic_field, static_barrier_minimizer,
                   static_minimize_unconstrained, static_solve_constrained, static_solve_equality,
                   static_solve_perturbed, switching_objective, two_agent_problem)
from pcipm.errors import InfeasibleAtTime
from pcipm.oracle import BoundReport, find_interior_point
from pcipm.problem import moving_quadratic
from pcipm.scenarios import PolynomialPath


def test_unconstrained_analytic():
    f = moving_quadratic(1, lambda t: np.array([3.0]), lambda t: np.array([0.0]))
    for t in (0.0, 5.0):
        sol = static_minimize_unconstrained(f, t, np.array([-40.0]))
        assert np.isclose(sol.x_star[0], 3.0, rtol=1e-14)
        assert sol.kkt_residual <= 1e-10
        assert sol.lambda_star.size == 0


def test_quadratic_single_newton_step():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(4, 4))
    f = quadratic_field(M @ M.T + np.eye(4), rng.normal(size=4))
    sol = static_minimize_unconstrained(f, 0.0, rng.normal(size=4) * 10)
    assert sol.iterations == 1


def test_switching_start_near_first_target(paths):
    problem = switching_objective(paths)
    sol = static_minimize_unconstrained(problem.objective, 0.0, np.zeros(2), tol=1e-10)
    y1 = paths[0].position(0.0)
    assert np.linalg.norm(sol.x_star - y1) <= 1e-3
    assert np.linalg.norm(problem.objective.gradient(y1, 0.0)) <= 1e-3


def test_constrained_hand_kkt(one_d):
    sol = static_solve_constrained(one_d, 0.0, 1e-9)
    assert np.isclose(sol.x_star[0], -1.0, atol=1e-8)
    assert np.isclose(sol.lambda_star[0], 2.0, atol=1e-7)
    assert sol.kkt_residual <= 1e-8
    assert sol.c_final * 1e-9 >= 1.0


def test_inactive_constraint_matches_unconstrained():
    f0 = quadratic_field(np.diag([2.0, 2.0]), [-2.0, 4.0])  # minimizer (1, -2)
    problem = TrackingProblem(f0, [affine_field([1.0, 0.0], 5.0)], m=2.0)
    sol = static_solve_constrained(problem, 0.0, 1e-10)
    free = static_minimize_unconstrained(f0, 0.0)
    assert abs(sol.lambda_star[0]) <= 1e-9
    assert np.allclose(sol.x_star, free.x_star, atol=1e-8)


def test_coincident_targets_zero_distance(paths):
    same = PolynomialPath(paths[0].coefficients, basis=paths[0].basis)
    problem = two_agent_problem([paths[0], same], r=0.05)
    sol = static_solve_constrained(problem, 0.3, 1e-9)
    assert np.linalg.norm(sol.x_star[:2] - sol.x_star[2:]) <= 1e-4
    assert sol.objective_value <= 1e-8


def test_perturbed_cases(one_d):
    exact = static_solve_constrained(one_d, 0.0, 1e-10)
    same = static_solve_perturbed(one_d, 0.0, 0.0, 1e-10)
    assert np.array_equal(exact.x_star, same.x_star)
    half = static_solve_perturbed(one_d, 0.0, 0.5, 1e-10)
    assert np.isclose(half.x_star[0], -0.5, atol=1e-9)
    assert np.isclose(half.objective_value, 0.25, atol=1e-9)
    assert half.objective_value <= exact.objective_value
    loose = static_solve_perturbed(one_d, 0.0, 3.0, 1e-10)
    assert abs(loose.x_star[0]) <= 1e-9


def test_barrier_minimizer_scalar_oracle(one_d_upper):
    B = BarrierField(one_d_upper, ScheduleParams(c0=1.0, gamma_c=0.0, s0=0.0, alpha=0.0))
    z = static_barrier_minimizer(B, 0.0, tol=1e-12)
    root = brentq(lambda v: 2 * v - 1.0 / (v - 1.0), -10.0, 1.0 - 1e-12, xtol=1e-14)
    assert abs(z[0] - root) <= 1e-10


def test_barrier_minimizer_large_c(one_d):
    B = BarrierField(one_d, ScheduleParams(c0=1e8, gamma_c=0.0, s0=0.0, alpha=0.0))
    z = static_barrier_minimizer(B, 0.0, tol=1e-10)
    x_star = static_solve_constrained(one_d, 0.0, 1e-10).x_star
    assert np.linalg.norm(z - x_star) <= 1e-4


def test_barrier_minimizer_without_constraints():
    f0 = quadratic_field(np.diag([2.0, 6.0]), [1.0, 3.0])
    B = BarrierField(TrackingProblem(f0), ScheduleParams())
    assert np.allclose(static_barrier_minimizer(B, 0.0), static_minimize_unconstrained(f0, 0.0).x_star)


def test_bounds_feasible_start(one_d):
    rep = evaluate_bounds(one_d, ScheduleParams(c0=10.0, gamma_c=0.0, s0=0.0, alpha=0.0), 0.0)
    assert rep.perturbation_gap == 0.0 and rep.perturbation_bound == 0.0
    assert rep.ok


def test_bounds_half_slack(one_d):
    rep = evaluate_bounds(one_d, ScheduleParams(c0=10.0, gamma_c=0.0, s0=0.5, alpha=0.0), 0.0, tol=1e-11)
    assert np.isclose(rep.perturbation_gap, 0.75, atol=1e-9)
    assert np.isclose(rep.perturbation_bound, 1.0, atol=1e-8)
    assert 0.0 <= rep.barrier_gap <= 0.1
    assert rep.ok


def test_bounds_tight_schedule(one_d):
    rep = evaluate_bounds(one_d, ScheduleParams(c0=1e8, gamma_c=0.0, s0=1e-8, alpha=0.0), 0.0, tol=1e-12)
    assert 0.0 <= rep.perturbation_gap <= 2.1e-8
    assert 0.0 <= rep.barrier_gap <= 2.1e-8


def test_bound_report_flags():
    assert BoundReport(0.5, 0.4, 0.0, 1.0).perturbation_ok is False
    assert BoundReport(0.4 + 5e-7, 0.4, -5e-7, 1.0).ok
    assert not BoundReport(0.1, 0.4, -2e-6, 1.0).barrier_ok


def test_infeasible_raises():
    problem = TrackingProblem(quadratic_field([[2.0]]),
                              [affine_field([1.0], -1.0), affine_field([-1.0], -1.0)], m=2.0)
    with pytest.raises(InfeasibleAtTime) as info:
        find_interior_point(problem, 0.25)
    assert info.value.t == 0.25
    with pytest.raises(InfeasibleAtTime):
        static_solve_constrained(problem, 0.25)


def test_phase_one_stops_near_boundary(one_d):
    x = find_interior_point(one_d, 0.0, x_init=np.array([5.0]))
    assert -10.0 < x[0] < -1.0


def test_equality_solution():
    eq = EqualitySystem.static([[1.0, 1.0]], [2.0])
    problem = TrackingProblem(quadratic_field(2 * np.eye(2)), (), m=2.0, equality=eq)
    assert np.allclose(static_solve_equality(problem, 0.0), [1.0, 1.0, -2.0])


def test_perturbed_never_worse_on_random_instances():
    rng = np.random.default_rng(4)
    for _ in range(10):
        n = 3
        M = rng.normal(size=(n, n))
        f0 = quadratic_field(M @ M.T + np.eye(n), rng.normal(size=n) * 3)
        cons = [affine_field(rng.normal(size=n), rng.uniform(0.1, 1.0)) for _ in range(2)]
        problem = TrackingProblem(f0, cons, m=1.0)
        exact = static_solve_constrained(problem, 0.0, 1e-10)
        pert = static_solve_perturbed(problem, 0.0, 0.2, 1e-10)
        assert pert.objective_value <= exact.objective_value + 1e-9
