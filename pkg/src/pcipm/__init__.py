"""Continuous-time prediction-correction interior-point tracking for
time-varying convex problems."""
from .barrier import (BarrierField, barrier_gradient, barrier_hessian, barrier_time_cross,
                      barrier_value)
from .errors import (DomainViolation, InfeasibleAtTime, MaxIterations, MissingEqualitySystem,
                     NonPositiveValue, NotPositiveDefinite, PcipmError, Singular, StepCollapse)
from .flows import (FlowState, GainMatrix, IntegrationResult, IntegratorOptions, NewtonFlow,
                    equality_flow, equality_flow_field, integrate, interior_point_flow,
                    interior_point_flow_field, unconstrained_flow, unconstrained_flow_field)
from .harness import (RunConfig, RunTrace, emit_csv, emit_summary, exit_code, fit_decay_rate,
                      load_config, parse_config, read_csv, run_scenario)
from .linalg import solve_spd, solve_symmetric_indefinite
from .oracle import (BoundReport, StaticSolution, evaluate_bounds, find_interior_point,
                     static_barrier_minimizer, static_minimize_unconstrained,
                     static_solve_constrained, static_solve_equality, static_solve_perturbed)
from .problem import (DerivativeReport, EqualitySystem, ScalarField, TrackingProblem,
                      affine_field, lagrangian_field, moving_quadratic, quadratic_field,
                      validate_derivatives)
from .scenarios import (PolynomialPath, WaypointSet, fit_min_acceleration_path,
                        generate_waypoints, switching_objective, target_paths, two_agent_problem)
from .schedules import ScheduleParams, barrier_coefficient, initial_slack, slack

__version__ = "0.1.0"
