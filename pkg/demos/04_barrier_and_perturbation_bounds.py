"""Frozen-time oracles on min x^2 s.t. x <= -1 (x* = -1, lambda* = 2).

Shows how far the barrier minimizer sits from the perturbed optimum (at most
p/c) and how much the slack lowers the optimal value (at most lambda* s).
"""
import numpy as np

from pcipm import (BarrierField, ScheduleParams, TrackingProblem, affine_field, quadratic_field,
                   static_barrier_minimizer, static_solve_constrained, static_solve_perturbed)

problem = TrackingProblem(quadratic_field([[2.0]]), [affine_field([1.0], -1.0)], m=2.0)
exact = static_solve_constrained(problem, 0.0, 1e-12)
print(f"x* = {exact.x_star[0]:.10f}, lambda* = {exact.lambda_star[0]:.10f}")

print("\nbarrier coefficient c   f0(z~*) - f0(x~*)   p/c")
for c in (10.0, 100.0, 1000.0, 1e4):
    B = BarrierField(problem, ScheduleParams(c0=c, gamma_c=0.0, s0=0.0, alpha=0.0))
    z = static_barrier_minimizer(B, 0.0, tol=1e-12)
    print(f"{c:>22g}   {z[0] ** 2 - 1.0:.8f}          {1 / c:g}")

print("\nslack s   f0(x*) - f0(x~*)   lambda* s")
for s in (0.5, 0.1, 0.01, 0.0):
    pert = static_solve_perturbed(problem, 0.0, s, 1e-12)
    print(f"{s:>7g}   {exact.objective_value - pert.objective_value:.8f}         {2 * s:g}")
