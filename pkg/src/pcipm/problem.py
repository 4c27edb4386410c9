"""Time-varying scalar fields and tracking problems.

A field carries closed-form evaluators for its value and the four derivatives
the Newton flows need: spatial gradient and Hessian, the mixed space-time
derivative, and the partial time derivative. Finite differences are only used
to *check* those evaluators (:func:`validate_derivatives`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MissingEqualitySystem


@dataclass(frozen=True)
class ScalarField:
    """A scalar function f(x, t) of an n-vector x and time t.

    Each evaluator takes ``(x, t)``; ``gradient`` and ``time_cross`` return
    n-vectors, ``hessian`` an n-by-n symmetric array.
    """

    dim: int
    value: Callable[[np.ndarray, float], float]
    gradient: Callable[[np.ndarray, float], np.ndarray]
    hessian: Callable[[np.ndarray, float], np.ndarray]
    time_cross: Callable[[np.ndarray, float], np.ndarray]
    time_partial: Callable[[np.ndarray, float], float]


@dataclass(frozen=True)
class EqualitySystem:
    """Time-varying linear constraints A(t) x = b(t) with their time derivatives."""

    A: Callable[[float], np.ndarray]
    b: Callable[[float], np.ndarray]
    A_dot: Callable[[float], np.ndarray]
    b_dot: Callable[[float], np.ndarray]

    @classmethod
    def static(cls, A, b):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        zA, zb = np.zeros_like(A), np.zeros_like(b)
        return cls(lambda t: A, lambda t: b, lambda t: zA, lambda t: zb)


@dataclass(frozen=True)
class TrackingProblem:
    """Objective plus ``p`` inequality constraints f_i(x, t) <= 0.

    ``m`` is the declared strong-convexity constant, used only when reporting
    tracking bounds. An optional equality system replaces the inequalities
    for the augmented (primal-dual) flow.
    """

    objective: ScalarField
    constraints: Sequence[ScalarField] = ()
    m: float = 1.0
    equality: Optional[EqualitySystem] = None
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("strong convexity constant m must be positive")
        for c in self.constraints:
            if c.dim != self.objective.dim:
                raise ValueError("constraint dimension differs from objective dimension")
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def n(self):
        return self.objective.dim

    @property
    def p(self):
        return len(self.constraints)

    def constraint_values(self, x, t):
        return np.array([c.value(x, t) for c in self.constraints], dtype=float)


# -- derivative checking -----------------------------------------------------

DERIVATIVES = ("gradient", "hessian", "time_cross", "time_partial")


@dataclass
class DerivativeReport:
    errors: dict
    tol: float

    @property
    def passed(self):
        return {k: bool(v <= self.tol) for k, v in self.errors.items()}

    @property
    def ok(self):
        return all(self.passed.values())

    def __str__(self):
        rows = [f"{k:>12s}  {v:.3e}  {'ok' if v <= self.tol else 'FAIL'}" for k, v in self.errors.items()]
        return "\n".join(rows)


def _rel_err(analytic, approx):
    analytic = np.asarray(analytic, dtype=float)
    approx = np.asarray(approx, dtype=float)
    scale = max(1.0, float(np.max(np.abs(approx), initial=0.0)))
    return float(np.max(np.abs(analytic - approx), initial=0.0)) / scale


def _time_diff(fun, t, h):
    # central where possible; second-order forward difference near t = 0
    if t - h >= 0.0:
        return (np.asarray(fun(t + h)) - np.asarray(fun(t - h))) / (2 * h)
    f0, f1, f2 = (np.asarray(fun(t + k * h)) for k in range(3))
    return (-3 * f0 + 4 * f1 - f2) / (2 * h)


def _boundary_distance(fld, x, t):
    # first-order distance to the nearest constraint surface, in x and in t
    gaps = fld.margins(x, t)
    if not gaps.size:
        return np.inf
    _, _, _, s_dot = fld.coefficients(t)
    dist = np.inf
    for gap, f in zip(gaps, fld.problem.constraints):
        speed = np.linalg.norm(f.gradient(x, t)) + abs(s_dot - f.time_partial(x, t))
        dist = min(dist, gap / max(speed, 1e-300))
    return dist


def validate_derivatives(fld, x, t, h=None, tol=1e-5):
    """Compare a field's analytic derivatives against central differences.

    The gradient and the time partial are differenced from ``value``; the
    Hessian and the mixed derivative from ``gradient``. Errors are
    max-abs differences scaled by ``max(1, |finite difference|)``.

    The default step is ``1e-6 (1 + |x|)``. For barrier-like fields (anything
    with ``margins``) it is further capped at 1e-3 of the distance to the
    domain boundary, since truncation error grows like (h / margin)^2.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if h is None:
        h = 1e-6 * (1.0 + np.linalg.norm(x))
        if hasattr(fld, "margins"):
            h = min(h, 1e-3 * _boundary_distance(fld, x, t))
    if h <= 0:
        raise ValueError("step h must be positive")

    eye = np.eye(n)
    fd_grad = np.array([(fld.value(x + h * e, t) - fld.value(x - h * e, t)) / (2 * h) for e in eye])
    fd_hess = np.array([(fld.gradient(x + h * e, t) - fld.gradient(x - h * e, t)) / (2 * h) for e in eye]).T
    fd_cross = _time_diff(lambda s: fld.gradient(x, s), t, h)
    fd_dt = _time_diff(lambda s: fld.value(x, s), t, h)

    errors = {
        "gradient": _rel_err(fld.gradient(x, t), fd_grad),
        "hessian": _rel_err(fld.hessian(x, t), fd_hess),
        "time_cross": _rel_err(fld.time_cross(x, t), fd_cross),
        "time_partial": _rel_err(fld.time_partial(x, t), fd_dt),
    }
    return DerivativeReport(errors=errors, tol=tol)


# -- equality-constrained Lagrangian ----------------------------------------

def lagrangian_field(problem):
    """L(z, t) = f0(x, t) + lam^T (A(t) x - b(t)) on the stacked z = (x, lam)."""
    eq = problem.equality
    if eq is None:
        raise MissingEqualitySystem("problem has no equality system")
    if problem.p:
        raise ValueError("lagrangian_field expects no inequality constraints")
    f0 = problem.objective
    n = f0.dim
    p = np.atleast_2d(eq.A(0.0)).shape[0]

    def split(z):
        z = np.asarray(z, dtype=float)
        return z[:n], z[n:]

    def value(z, t):
        x, lam = split(z)
        return f0.value(x, t) + lam @ (eq.A(t) @ x - eq.b(t))

    def gradient(z, t):
        x, lam = split(z)
        A = eq.A(t)
        return np.concatenate([f0.gradient(x, t) + A.T @ lam, A @ x - eq.b(t)])

    def hessian(z, t):
        x, _ = split(z)
        A = eq.A(t)
        K = np.zeros((n + p, n + p))
        K[:n, :n] = f0.hessian(x, t)
        K[:n, n:] = A.T
        K[n:, :n] = A
        return K

    def time_cross(z, t):
        x, lam = split(z)
        Ad = eq.A_dot(t)
        return np.concatenate([f0.time_cross(x, t) + Ad.T @ lam, Ad @ x - eq.b_dot(t)])

    def time_partial(z, t):
        x, lam = split(z)
        return f0.time_partial(x, t) + lam @ (eq.A_dot(t) @ x - eq.b_dot(t))

    return ScalarField(n + p, value, gradient, hessian, time_cross, time_partial)


# -- convenience constructors ------------------------------------------------

def quadratic_field(Q, q=None, r=0.0):
    """Static f(x) = 0.5 x^T Q x + q^T x + r."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    n = Q.shape[0]
    q = np.zeros(n) if q is None else np.asarray(q, dtype=float)
    zero = np.zeros(n)
    return ScalarField(
        n,
        value=lambda x, t: 0.5 * x @ Q @ x + q @ x + r,
        gradient=lambda x, t: Q @ x + q,
        hessian=lambda x, t: Q,
        time_cross=lambda x, t: zero,
        time_partial=lambda x, t: 0.0,
    )


def moving_quadratic(n, target, target_dot, weight=1.0):
    """f(x, t) = weight * ||x - y(t)||^2 for a target path y(t)."""
    eye = 2.0 * weight * np.eye(n)

    def value(x, t):
        d = x - target(t)
        return weight * d @ d

    return ScalarField(
        n,
        value=value,
        gradient=lambda x, t: 2.0 * weight * (x - target(t)),
        hessian=lambda x, t: eye,
        time_cross=lambda x, t: -2.0 * weight * np.asarray(target_dot(t), dtype=float),
        time_partial=lambda x, t: -2.0 * weight * (x - target(t)) @ target_dot(t),
    )


def affine_field(a, b, a_dot=None, b_dot=None):
    """f(x, t) = a(t)^T x - b(t). ``a`` and ``b`` may be constants or callables of t."""
    def as_fun(v, default):
        if v is None:
            return default
        if callable(v):
            return v
        arr = np.asarray(v, dtype=float)
        return lambda t: arr

    a_f = as_fun(a, None)
    n = np.atleast_1d(a_f(0.0)).size
    b_f = as_fun(b, None)
    ad_f = as_fun(a_dot, lambda t: np.zeros(n))
    bd_f = as_fun(b_dot, lambda t: 0.0)
    zero_h = np.zeros((n, n))
    return ScalarField(
        n,
        value=lambda x, t: float(a_f(t) @ x - b_f(t)),
        gradient=lambda x, t: np.asarray(a_f(t), dtype=float),
        hessian=lambda x, t: zero_h,
        time_cross=lambda x, t: np.asarray(ad_f(t), dtype=float),
        time_partial=lambda x, t: float(ad_f(t) @ x - bd_f(t)),
    )
