"""Frozen-time reference solvers.

At a fixed time t these compute, by conventional static means, the quantities
the flows are compared against: the constrained optimum x*(t) with its
multipliers, the optimum of the slack-perturbed problem, and the minimizer of
the perturbed barrier. :func:`evaluate_bounds` turns them into the two
suboptimality gaps and their guaranteed bounds.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .barrier import BarrierField
from .errors import (DomainViolation, InfeasibleAtTime, MaxIterations, NotPositiveDefinite,
                     Singular)
from .linalg import solve_spd, solve_symmetric_indefinite
from .problem import lagrangian_field
from .schedules import ScheduleParams, barrier_coefficient, slack

ARMIJO = 0.3
BACKTRACK = 0.8
BOUND_SLACK = 1e-6


@dataclass
class StaticSolution:
    x_star: np.ndarray
    lambda_star: np.ndarray
    objective_value: float
    kkt_residual: float
    kkt: dict = field(default_factory=dict)
    iterations: int = 0
    c_final: float = np.inf


def _newton_minimize(fld, t, x, tol, max_iter=200, dec_tol=None):
    """Damped Newton with Armijo backtracking on a field frozen at time t.

    Stops when |grad| <= tol or the Newton decrement sqrt(g^T H^-1 g) is at
    most ``dec_tol`` (default ``tol``).
    The decrement matters for stiff barriers, where rounding in s - f_i
    leaves a gradient floor well above ``tol`` while the objective is already
    resolved. Trial points where the field cannot be evaluated (barrier
    domain) are treated as failed line-search trials. Near the optimum, where
    the objective no longer resolves the decrease, a step that shrinks the
    gradient norm is accepted instead.
    """
    dec_tol = tol if dec_tol is None else dec_tol
    x = np.array(x, dtype=float)
    fx = fld.value(x, t)
    g = fld.gradient(x, t)
    for it in range(max_iter):
        gnorm = np.linalg.norm(g)
        if gnorm <= tol:
            return x, it
        H = fld.hessian(x, t)
        try:
            d = -solve_spd(H, g)
        except NotPositiveDefinite:
            n = x.size
            d = -solve_spd(H + 1e-10 * (1.0 + np.trace(H) / n) * np.eye(n), g)
        slope = g @ d
        if np.sqrt(max(-slope, 0.0)) <= dec_tol:
            return x, it
        step = 1.0
        while True:
            trial = x + step * d
            try:
                f_new = fld.value(trial, t)
                g_new = fld.gradient(trial, t)
                if f_new <= fx + ARMIJO * step * slope or (
                        np.linalg.norm(g_new) < (1.0 - ARMIJO * step) * gnorm):
                    break
            except DomainViolation:
                pass
            step *= BACKTRACK
            if step < 1e-14:
                raise MaxIterations(f"line search stalled at |grad|={gnorm:.3e}")
        x, fx, g = trial, f_new, g_new
    if np.linalg.norm(g) <= tol:
        return x, max_iter
    raise MaxIterations(f"Newton did not reach |grad| <= {tol:g} in {max_iter} iterations")


def _primal_dual_polish(problem, t, s, x, lam, mu, iters=20):
    """Newton on grad f0 + G^T lam = 0, lam_i (s - f_i) = mu, kept strictly interior.

    Recovers multipliers far more accurately than 1/(c (s - f_i)) once c is
    large, since the complementarity rows stay well scaled.
    """
    n, p = problem.n, problem.p
    cons = problem.constraints

    def residual(x, lam):
        G = np.array([f.gradient(x, t) for f in cons])
        gaps = s - problem.constraint_values(x, t)
        r = np.concatenate([problem.objective.gradient(x, t) + G.T @ lam, lam * gaps - mu])
        return r, G, gaps

    r, G, gaps = residual(x, lam)
    for _ in range(iters):
        norm = np.linalg.norm(r)
        if norm <= 1e-15 * (1.0 + np.linalg.norm(lam)):
            break
        H = problem.objective.hessian(x, t) + sum(li * f.hessian(x, t) for li, f in zip(lam, cons))
        J = np.zeros((n + p, n + p))
        J[:n, :n] = H
        J[:n, n:] = G.T
        J[n:, :n] = -lam[:, None] * G
        J[n:, n:] = np.diag(gaps)
        try:
            d = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        dx, dl = d[:n], d[n:]
        step = 1.0
        neg = dl < 0
        if np.any(neg):
            step = min(step, 0.99 * np.min(-lam[neg] / dl[neg]))
        while step > 1e-12:
            xt, lt = x + step * dx, lam + step * dl
            rt, Gt, gt = residual(xt, lt)
            if np.all(gt > 0) and np.linalg.norm(rt) < norm:
                break
            step *= 0.5
        else:
            break
        x, lam, r, G, gaps = xt, lt, rt, Gt, gt
    return x, lam


def static_minimize_unconstrained(f, t, x_init=None, tol=1e-10, max_iter=200):
    """Minimize a strongly convex field at frozen time ``t``."""
    x0 = np.zeros(f.dim) if x_init is None else x_init
    x, iters = _newton_minimize(f, t, x0, tol, max_iter)
    r = float(np.linalg.norm(f.gradient(x, t)))
    return StaticSolution(x, np.zeros(0), float(f.value(x, t)), r,
                          kkt={"stationarity": r}, iterations=iters)


# -- phase I -----------------------------------------------------------------

class _SmoothMax:
    """T * log sum exp((f_i - s) / T) plus a proximal term around ``anchor``."""

    def __init__(self, constraints, s, T, anchor, prox):
        self.cons, self.s, self.T = constraints, s, T
        self.anchor, self.prox = anchor, prox
        self.dim = anchor.size

    def _weights(self, x, t):
        v = np.array([f.value(x, t) for f in self.cons]) - self.s
        z = v / self.T
        w = np.exp(z - z.max())
        return v, w / w.sum(), z.max()

    def value(self, x, t):
        v, w, zmax = self._weights(x, t)
        lse = self.T * (zmax + np.log(np.sum(np.exp(v / self.T - zmax))))
        return lse + 0.5 * self.prox * np.sum((x - self.anchor) ** 2)

    def gradient(self, x, t):
        _, w, _ = self._weights(x, t)
        G = np.array([f.gradient(x, t) for f in self.cons])
        return G.T @ w + self.prox * (x - self.anchor)

    def hessian(self, x, t):
        _, w, _ = self._weights(x, t)
        G = np.array([f.gradient(x, t) for f in self.cons])
        H = sum(wi * f.hessian(x, t) for wi, f in zip(w, self.cons))
        mean = G.T @ w
        H = H + ((G.T * w) @ G - np.outer(mean, mean)) / self.T
        return H + self.prox * np.eye(self.dim)


def find_interior_point(problem, t, s=0.0, x_init=None, stages=3, passes=30, prox=1.0):
    """Return x with f_i(x, t) < s for all i, or raise InfeasibleAtTime.

    Minimizes a log-sum-exp smoothing of max_i f_i at three decreasing
    temperatures. Each temperature runs proximal passes (Newton on the
    smoothed max plus ``prox/2 |x - anchor|^2``, anchor moved after each pass)
    so the iterates drift toward the feasible set instead of jumping to the
    far minimizer of an unbounded smoothing. Stops at the first strictly
    feasible iterate.
    """
    x = np.zeros(problem.n) if x_init is None else np.array(x_init, dtype=float)
    cons = problem.constraints
    margin = 1e-9 * (1.0 + abs(s))

    def worst(y):
        return float(np.max(problem.constraint_values(y, t))) - s

    if not cons or worst(x) < -margin:
        return x
    T = max(abs(worst(x)), 1e-3)
    for _ in range(stages):
        for _ in range(passes):
            smax = _SmoothMax(cons, s, T, x.copy(), prox)
            for _ in range(50):
                g = smax.gradient(x, t)
                d = -solve_spd(smax.hessian(x, t), g)
                step, f_x = 1.0, smax.value(x, t)
                while smax.value(x + step * d, t) > f_x + ARMIJO * step * (g @ d) and step > 1e-12:
                    step *= BACKTRACK
                x = x + step * d
                if worst(x) < -margin:
                    return x
                if np.linalg.norm(step * d) <= 1e-12 * (1.0 + np.linalg.norm(x)):
                    break
        T *= 0.1
    raise InfeasibleAtTime(f"no strictly feasible point found at t={t:.6g} "
                           f"(max violation {worst(x):.3e})", t=t)


# -- constrained solves ----------------------------------------------------------

def _frozen_barrier(problem, c, s):
    return BarrierField(problem, ScheduleParams(c0=c, gamma_c=0.0, s0=s, alpha=0.0))


def kkt_report(problem, x, lam, t, s=0.0):
    """The four optimality residuals of the s-perturbed problem at (x, lam)."""
    fvals = problem.constraint_values(x, t) - s
    grad = problem.objective.gradient(x, t).astype(float)
    for li, f in zip(lam, problem.constraints):
        grad = grad + li * f.gradient(x, t)
    return {
        "stationarity": float(np.linalg.norm(grad)),
        "complementarity": float(np.max(np.abs(lam * fvals), initial=0.0)),
        "dual_feasibility": float(np.max(-lam, initial=0.0).clip(min=0.0)),
        "primal_feasibility": float(np.max(fvals, initial=0.0).clip(min=0.0)),
    }


def static_solve_perturbed(problem, t, s_value=0.0, tol=1e-9, x_init=None, c_start=1.0):
    """Solve min f0 s.t. f_i <= s_value at frozen t by barrier path following.

    Barrier stages multiply c by 10, each warm-started and centered by damped
    Newton, until the duality-gap surrogate p/c is at most ``tol``. The
    multipliers start from 1/(c (s - f_i)) and are refined together with x by
    a primal-dual Newton polish on the same central-path point.
    """
    if problem.p == 0:
        return static_minimize_unconstrained(problem.objective, t, x_init, tol)
    x = find_interior_point(problem, t, s_value, x_init)
    c = c_start
    iters = 0
    while True:
        B = _frozen_barrier(problem, c, s_value)
        x, k = _newton_minimize(B, t, x, tol, dec_tol=1e-3 * np.sqrt(tol))
        iters += k
        if problem.p / c <= tol:
            break
        c *= 10.0
    gaps = s_value - problem.constraint_values(x, t)
    x, lam = _primal_dual_polish(problem, t, s_value, x, 1.0 / (c * gaps), 1.0 / c)
    kkt = kkt_report(problem, x, lam, t, s_value)
    return StaticSolution(x, lam, float(problem.objective.value(x, t)), max(kkt.values()),
                          kkt=kkt, iterations=iters, c_final=c)


def static_solve_constrained(problem, t, tol=1e-9, x_init=None):
    """x*(t), lambda*(t) of the unperturbed problem."""
    return static_solve_perturbed(problem, t, 0.0, tol, x_init)


def static_barrier_minimizer(barrier, t, tol=1e-10, x_init=None):
    """Minimizer of the perturbed barrier at frozen time t."""
    problem = barrier.problem
    s, _ = slack(barrier.schedule, t)
    x0 = x_init
    if problem.p and (x0 is None or not barrier.in_domain(np.asarray(x0, dtype=float), t)):
        x0 = find_interior_point(problem, t, s, x0)
    if x0 is None:
        x0 = np.zeros(problem.n)
    x, _ = _newton_minimize(barrier, t, x0, tol)
    return x


def static_solve_equality(problem, t, tol=1e-10, z_init=None, max_iter=50):
    """z*(t) = (x*, lam*) of the equality-constrained problem by Newton on grad L."""
    L = lagrangian_field(problem)
    z = np.zeros(L.dim) if z_init is None else np.array(z_init, dtype=float)
    for it in range(max_iter):
        g = L.gradient(z, t)
        if np.linalg.norm(g) <= tol:
            return z
        z = z - solve_symmetric_indefinite(L.hessian(z, t), g)
    if np.linalg.norm(L.gradient(z, t)) <= tol:
        return z
    raise MaxIterations("equality-constrained Newton did not converge")


# -- bounds ----------------------------------------------------------------------

@dataclass
class BoundReport:
    perturbation_gap: float
    perturbation_bound: float
    barrier_gap: float
    barrier_bound: float
    x_star: np.ndarray = None
    lambda_star: np.ndarray = None
    x_tilde_star: np.ndarray = None
    z_tilde_star: np.ndarray = None
    slack: float = BOUND_SLACK

    @property
    def perturbation_ok(self):
        return -self.slack <= self.perturbation_gap <= self.perturbation_bound + self.slack

    @property
    def barrier_ok(self):
        return -self.slack <= self.barrier_gap <= self.barrier_bound + self.slack

    @property
    def ok(self):
        return self.perturbation_ok and self.barrier_ok


def evaluate_bounds(problem, schedule, t, z_tilde=None, tol=1e-9, x_init=None):
    """Suboptimality of the slack perturbation and of the barrier minimizer.

    perturbation gap  f0(x*) - f0(x~*)   bounded by  sum_i lambda*_i s(t)
    barrier gap       f0(z~*) - f0(x~*)  bounded by  p / c(t)

    ``z_tilde`` is the barrier minimizer at t; it is computed when omitted.
    """
    s, _ = slack(schedule, t)
    c, _ = barrier_coefficient(schedule, t)
    f0 = problem.objective
    exact = static_solve_constrained(problem, t, tol, x_init)
    perturbed = exact if s == 0.0 else static_solve_perturbed(problem, t, s, tol, x_init)
    if z_tilde is None:
        z_tilde = static_barrier_minimizer(BarrierField(problem, schedule), t, tol, x_init)
    z_tilde = np.asarray(z_tilde, dtype=float)
    return BoundReport(
        perturbation_gap=exact.objective_value - perturbed.objective_value,
        perturbation_bound=float(np.sum(exact.lambda_star) * s),
        barrier_gap=float(f0.value(z_tilde, t)) - perturbed.objective_value,
        barrier_bound=problem.p / c,
        x_star=exact.x_star,
        lambda_star=exact.lambda_star,
        x_tilde_star=perturbed.x_star,
        z_tilde_star=z_tilde,
    )
