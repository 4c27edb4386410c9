"""Perturbed log barrier with a time-varying coefficient and slack.

    Phi(x, t) = f0(x, t) - (1/c(t)) * sum_i log(s(t) - f_i(x, t))

defined on the perturbed domain {x : f_i(x, t) < s(t) for all i}.
"""
import numpy as np

from .errors import DomainViolation
from .schedules import ScheduleParams, barrier_coefficient, slack

# margins at or below this count as outside the domain: (s - f)^-2 is
# meaningless once the subtraction has cancelled to a few ulps
MIN_MARGIN = 1e-14


class BarrierField:
    """Barrier function of a :class:`~pcipm.problem.TrackingProblem`.

    Exposes the same evaluator interface as :class:`~pcipm.problem.ScalarField`
    (``value``, ``gradient``, ``hessian``, ``time_cross``, ``time_partial``),
    so it can be handed to anything that takes a field. Evaluating outside
    the perturbed domain raises :class:`~pcipm.errors.DomainViolation`.
    """

    def __init__(self, problem, schedule=None):
        self.problem = problem
        self.schedule = schedule if schedule is not None else ScheduleParams()
        self.dim = problem.n

    def __repr__(self):
        return f"BarrierField(n={self.dim}, p={self.problem.p}, schedule={self.schedule})"

    def coefficients(self, t):
        c, c_dot = barrier_coefficient(self.schedule, t)
        s, s_dot = slack(self.schedule, t)
        return c, c_dot, s, s_dot

    def margins(self, x, t):
        """Return s(t) - f_i(x, t) for every constraint, checking the domain."""
        s, _ = slack(self.schedule, t)
        gaps = s - self.problem.constraint_values(x, t)
        if gaps.size and np.min(gaps) <= MIN_MARGIN:
            i = int(np.argmin(gaps))
            raise DomainViolation(f"constraint {i + 1} margin {gaps[i]:.3e} at t={t:.6g}")
        return gaps

    def in_domain(self, x, t):
        try:
            self.margins(x, t)
        except DomainViolation:
            return False
        return True

    def value(self, x, t):
        f0 = self.problem.objective.value(x, t)
        if not self.problem.p:
            return f0
        gaps = self.margins(x, t)
        c, _ = barrier_coefficient(self.schedule, t)
        return f0 - np.sum(np.log(gaps)) / c

    def gradient(self, x, t):
        g0 = self.problem.objective.gradient(x, t)
        if not self.problem.p:
            return g0
        gaps = self.margins(x, t)
        c, _ = barrier_coefficient(self.schedule, t)
        grads = np.array([f.gradient(x, t) for f in self.problem.constraints])
        return g0 + (grads.T @ (1.0 / gaps)) / c

    def hessian(self, x, t):
        H0 = self.problem.objective.hessian(x, t)
        if not self.problem.p:
            return H0
        gaps = self.margins(x, t)
        c, _ = barrier_coefficient(self.schedule, t)
        H = np.array(H0, dtype=float, copy=True)
        for f, gap in zip(self.problem.constraints, gaps):
            g = f.gradient(x, t)
            H += (np.outer(g, g) / gap**2 + f.hessian(x, t) / gap) / c
        return 0.5 * (H + H.T)

    def time_cross(self, x, t):
        """Mixed derivative d/dt of the barrier gradient.

        Besides the constraints' own time dependence this picks up the drift
        of c(t) and s(t):

            grad_xt f0 - (c_dot / c^2) sum grad f_i / (s - f_i)
              + (1/c) sum [ grad_xt f_i / (s - f_i)
                            - grad f_i (s_dot - d_t f_i) / (s - f_i)^2 ]
        """
        r0 = self.problem.objective.time_cross(x, t)
        if not self.problem.p:
            return r0
        gaps = self.margins(x, t)
        c, c_dot, _, s_dot = self.coefficients(t)
        drift = np.zeros(self.dim)
        moving = np.zeros(self.dim)
        for f, gap in zip(self.problem.constraints, gaps):
            g = f.gradient(x, t)
            drift += g / gap
            moving += f.time_cross(x, t) / gap - g * (s_dot - f.time_partial(x, t)) / gap**2
        return r0 - (c_dot / c**2) * drift + moving / c

    def time_partial(self, x, t):
        d0 = self.problem.objective.time_partial(x, t)
        if not self.problem.p:
            return d0
        gaps = self.margins(x, t)
        c, c_dot, _, s_dot = self.coefficients(t)
        ft = np.array([f.time_partial(x, t) for f in self.problem.constraints])
        return d0 + (c_dot / c**2) * np.sum(np.log(gaps)) - np.sum((s_dot - ft) / gaps) / c


def barrier_value(B, x, t):
    return B.value(np.asarray(x, dtype=float), t)


def barrier_gradient(B, x, t):
    return B.gradient(np.asarray(x, dtype=float), t)


def barrier_hessian(B, x, t):
    return B.hessian(np.asarray(x, dtype=float), t)


def barrier_time_cross(B, x, t):
    return B.time_cross(np.asarray(x, dtype=float), t)
