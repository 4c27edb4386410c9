"""Exponential laws for the barrier coefficient c(t) and the constraint slack s(t)."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ScheduleParams:
    c0: float = 1.0
    gamma_c: float = 6.0
    s0: float = 0.0
    alpha: float = 10.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if self.gamma_c < 0:
            raise ValueError("gamma_c must be nonnegative")
        if self.s0 < 0:
            raise ValueError("s0 must be nonnegative")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


def barrier_coefficient(params, t):
    """Return ``(c, c_dot)`` for c(t) = c0 exp(gamma_c t)."""
    c = params.c0 * np.exp(params.gamma_c * t)
    return c, params.gamma_c * c


def slack(params, t):
    """Return ``(s, s_dot)`` for s(t) = s0 exp(-alpha t)."""
    s = params.s0 * np.exp(-params.alpha * t)
    return s, -params.alpha * s


def default_epsilon(max_violation):
    return 1e-3 * max(1.0, abs(max_violation))


def initial_slack(problem, x0, epsilon=None):
    """Smallest-style initial slack that puts ``x0`` inside the perturbed domain.

    Zero when every constraint is already satisfied at ``(x0, 0)``; otherwise
    the largest violation plus a margin ``epsilon`` (by default
    ``1e-3 * max(1, |largest violation|)``).
    """
    if problem.p == 0:
        return 0.0
    worst = float(np.max(problem.constraint_values(np.asarray(x0, dtype=float), 0.0)))
    if worst <= 0.0:
        return 0.0
    if epsilon is None:
        epsilon = default_epsilon(worst)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return worst + epsilon
