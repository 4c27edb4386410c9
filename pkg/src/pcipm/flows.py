"""Prediction-correction Newton flows and a domain-guarded explicit Euler integrator.

All three flows share one shape,

    dx/dt = -H(x, t)^{-1} [ P grad(x, t) + grad_xt(x, t) ],

applied to the raw objective (unconstrained), to the Lagrangian on the stacked
primal-dual vector (equality constrained), or to the perturbed barrier
(interior point). ``P`` is a gain matrix with ``P >= sigma I``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, NotPositiveDefinite, Singular, StepCollapse
from .linalg import check_symmetric, solve_spd, solve_symmetric_indefinite
from .problem import lagrangian_field

# relative size of the ridge added on the single retry after a failed Cholesky
RIDGE = 1e-8
# an interior-point step must keep every margin s - f_i above this fraction of
# its previous value. The Newton correction restores a margin u only at a rate
# proportional to u, while the Euler error of a curved constraint is O(h^2);
# letting margins halve per step walks the state onto the boundary, where no
# usable step exists any more
BOUNDARY_FRACTION = 0.9


@dataclass(frozen=True)
class GainMatrix:
    P: np.ndarray
    sigma: float

    def __post_init__(self):
        P = check_symmetric(self.P)
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        lo = np.linalg.eigvalsh(P)[0]
        if lo < self.sigma * (1 - 1e-12):
            raise ValueError(f"smallest eigenvalue {lo:.6g} of P is below sigma={self.sigma:.6g}")
        object.__setattr__(self, "P", P)

    @classmethod
    def isotropic(cls, sigma, n):
        return cls(sigma * np.eye(n), sigma)

    @property
    def dim(self):
        return self.P.shape[0]


def _as_gain(gain, n):
    if isinstance(gain, GainMatrix):
        if gain.dim != n:
            raise ValueError(f"gain has dimension {gain.dim}, flow has {n}")
        return gain
    return GainMatrix.isotropic(float(gain), n)


def newton_direction(H, rhs, solver="spd", regularize=False):
    """Return ``(H^{-1} rhs, regularized)``.

    With ``regularize`` a failed Cholesky is retried once on
    ``H + 1e-8 (1 + trace(H)/n) I``; a second failure propagates.
    """
    if solver == "symmetric":
        return solve_symmetric_indefinite(H, rhs), False
    try:
        return solve_spd(H, rhs), False
    except NotPositiveDefinite:
        if not regularize:
            raise
    n = H.shape[0]
    ridge = RIDGE * (1.0 + np.trace(H) / n)
    return solve_spd(H + ridge * np.eye(n), rhs), True


class NewtonFlow:
    """Callable vector field ``v(y, t)`` of a time-varying Newton flow.

    ``fld`` is anything with ``gradient``, ``hessian`` and ``time_cross``
    evaluators. Counts evaluations and Hessian regularizations.
    """

    def __init__(self, fld, gain, solver="spd", regularize=False, boundary_fraction=None):
        self.field = fld
        self.gain = _as_gain(gain, fld.dim)
        self.solver = solver
        self.regularize = regularize
        self.boundary_fraction = boundary_fraction
        self.evaluations = 0
        self.regularized = 0

    def __call__(self, y, t):
        g = self.field.gradient(y, t)
        rhs = self.gain.P @ g + self.field.time_cross(y, t)
        H = self.field.hessian(y, t)
        d, reg = newton_direction(H, rhs, self.solver, self.regularize)
        self.evaluations += 1
        self.regularized += reg
        return -d

    def accept_step(self, y_old, t_old, y_new, t_new):
        """Fraction-to-boundary test used by :func:`integrate` (always true without margins)."""
        if self.boundary_fraction is None:
            return True
        old = self.field.margins(y_old, t_old)
        return bool(np.all(self.field.margins(y_new, t_new) >= self.boundary_fraction * old))


def unconstrained_flow(problem, gain):
    f0 = getattr(problem, "objective", problem)
    return NewtonFlow(f0, gain, "spd")


def equality_flow(problem, gain):
    return NewtonFlow(lagrangian_field(problem), gain, "symmetric")


def interior_point_flow(barrier, gain, regularize=True, boundary_fraction=BOUNDARY_FRACTION):
    return NewtonFlow(barrier, gain, "spd", regularize=regularize, boundary_fraction=boundary_fraction)


def unconstrained_flow_field(problem, gain, x, t):
    """Velocity of the unconstrained prediction-correction Newton flow at (x, t)."""
    return unconstrained_flow(problem, gain)(np.asarray(x, dtype=float), t)


def equality_flow_field(problem, gain, z, t):
    """Velocity of the primal-dual flow on z = (x, lam); the saddle system is
    solved with a symmetric indefinite factorization."""
    return equality_flow(problem, gain)(np.asarray(z, dtype=float), t)


def interior_point_flow_field(barrier, gain, x, t, regularize=True):
    return interior_point_flow(barrier, gain, regularize)(np.asarray(x, dtype=float), t)


# -- integration ---------------------------------------------------------------

@dataclass
class FlowState:
    t: float
    x: np.ndarray
    lam: Optional[np.ndarray] = None
    last_step: float = 0.0
    step_count: int = 0
    reject_count: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.lam is not None:
            self.lam = np.asarray(self.lam, dtype=float)

    @property
    def z(self):
        """Stacked state vector handed to the flow field."""
        return self.x if self.lam is None else np.concatenate([self.x, self.lam])

    def with_vector(self, y, **kw):
        n = self.x.size
        lam = None if self.lam is None else np.array(y[n:])
        return replace(self, x=np.array(y[:n]), lam=lam, **kw)

    def copy(self):
        return replace(self, x=self.x.copy(), lam=None if self.lam is None else self.lam.copy())


@dataclass(frozen=True)
class IntegratorOptions:
    max_step: float = 0.01
    min_step: float = 1e-7
    shrink: float = 0.5
    sample_interval: float = 0.005

    def __post_init__(self):
        if not 0 < self.min_step <= self.max_step:
            raise ValueError("need 0 < min_step <= max_step")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")


@dataclass
class IntegrationResult:
    state: FlowState
    samples: list = field(default_factory=list)


# failures at a tentative state that a shorter step can cure
RECOVERABLE = (DomainViolation, NotPositiveDefinite, Singular)


def sample_times(t0, t_end, interval):
    """Sampling grid t0 + k*interval up to t_end (inclusive within rounding)."""
    count = int(math.floor((t_end - t0) / interval + 1e-9)) + 1
    return t0 + interval * np.arange(count)


def integrate(fld: Callable, state0: FlowState, t_end: float, opts: IntegratorOptions = None,
              sampler: Callable = None) -> IntegrationResult:
    """Advance ``y' = fld(y, t)`` by explicit Euler from ``state0`` to ``t_end``.

    Steps are at most ``opts.max_step`` and are shortened to land exactly on
    the sampling grid. A step whose end point cannot be evaluated (it left the
    barrier domain or a factorization failed there), or that ``fld.accept_step``
    refuses when the field defines one, is rejected and retried with
    ``h * opts.shrink``; :class:`StepCollapse` is raised once ``h`` drops
    below ``opts.min_step``. ``sampler(state)`` is called at every grid time
    and its return values are collected in ``samples``.
    """
    opts = opts or IntegratorOptions()
    if sampler is None:
        sampler = FlowState.copy
    state = state0.copy()
    if t_end < state.t:
        raise ValueError("t_end precedes the initial time")

    snap = 1e-9 * opts.max_step
    grid = sample_times(state.t, t_end, opts.sample_interval)
    if abs(grid[-1] - t_end) <= snap or grid[-1] > t_end:
        grid[-1] = t_end
    samples = [sampler(state)]
    k = 1

    y = state.z
    t = state.t
    v = np.asarray(fld(y, t), dtype=float)
    accept = getattr(fld, "accept_step", None)

    while t_end - t > snap:
        target = grid[k] if k < grid.size else t_end
        target = min(target, t_end)
        h = min(opts.max_step, target - t)
        lands = (target - t) - h <= snap
        while True:
            t_new = target if lands else t + h
            y_new = y + (t_new - t) * v
            try:
                v_new = np.asarray(fld(y_new, t_new), dtype=float)
                if not np.all(np.isfinite(v_new)):
                    raise NotPositiveDefinite("non-finite flow velocity")
                if accept is None or accept(y, t, y_new, t_new):
                    break
            except RECOVERABLE:
                pass
            state.reject_count += 1
            h *= opts.shrink
            lands = False
            if h < opts.min_step:
                raise StepCollapse(f"step fell below min_step={opts.min_step:g} at t={t:.9g}", t=t, step=h)
        state.last_step = t_new - t
        state.step_count += 1
        y, t, v = y_new, t_new, v_new
        state = state.with_vector(y, t=t)
        if k < grid.size and lands and target == grid[k]:
            samples.append(sampler(state))
            k += 1

    return IntegrationResult(state=state, samples=samples)
