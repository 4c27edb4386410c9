"""Target-tracking scenarios: minimum-acceleration target paths, the switching
single-agent objective, and the two-agent constrained problem.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import legendre
from scipy.special import expit

from .linalg import solve_full_pivot
from .problem import ScalarField, TrackingProblem


@dataclass(frozen=True)
class WaypointSet:
    points: np.ndarray  # (L + 2, k)
    times: np.ndarray  # (L + 2,)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        times = np.asarray(self.times, dtype=float)
        if pts.shape[0] != times.size:
            raise ValueError("need one time per waypoint")
        if np.any(np.diff(times) <= 0):
            raise ValueError("waypoint times must be strictly increasing")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "times", times)

    @property
    def L(self):
        return self.points.shape[0] - 2

    @property
    def k(self):
        return self.points.shape[1]

    @property
    def horizon(self):
        return float(self.times[-1])


def generate_waypoints(seed, L, k=2, horizon=1.0):
    """L + 2 points drawn uniformly in the unit box, visited at l*horizon/(L+1).

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    if L < 1:
        raise ValueError("need at least one intermediate waypoint")
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, 1.0, size=(L + 2, k))
    times = horizon * np.arange(L + 2) / (L + 1)
    return WaypointSet(points, times)


@dataclass(frozen=True)
class PolynomialPath:
    """A k-dimensional polynomial path on [0, horizon].

    Row ``d`` of ``coefficients`` holds the coefficients of coordinate d in
    the normalized time ``tau = 2 t / horizon - 1``, which maps the horizon
    onto [-1, 1]; ``basis`` says whether they are monomial or Chebyshev
    coefficients. Evaluation always goes through the Chebyshev form: at
    degree ~30 the monomial coefficients reach 1e6 and summing them loses
    about 1e-11 absolutely, enough to spoil finite-difference checks.
    """

    coefficients: np.ndarray  # (k, n_coeffs)
    horizon: float = 1.0
    basis: str = "monomial"

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        if self.basis not in ("monomial", "chebyshev"):
            raise ValueError("basis must be 'monomial' or 'chebyshev'")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "coefficients", c)
        ch = c if self.basis == "chebyshev" else np.array([cheb.poly2cheb(row) for row in c])
        scl = 2.0 / self.horizon
        object.__setattr__(self, "_c0", ch)
        object.__setattr__(self, "_d1", cheb.chebder(ch, 1, scl=scl, axis=1))
        object.__setattr__(self, "_d2", cheb.chebder(ch, 2, scl=scl, axis=1))
        # scalar-time memo: the oracles evaluate one frozen t many times
        object.__setattr__(self, "_memo", {})

    @property
    def monomial_coefficients(self):
        """Monomial coefficients in tau, shape (k, n_coeffs)."""
        if self.basis == "monomial":
            return self.coefficients
        return np.array([cheb.cheb2poly(row) for row in self._c0])

    @property
    def chebyshev_coefficients(self):
        return self._c0

    @property
    def k(self):
        return self.coefficients.shape[0]

    @property
    def n_coeffs(self):
        return self.coefficients.shape[1]

    def _eval(self, coeffs, t, order=0):
        scalar = np.ndim(t) == 0
        if scalar:
            key = (order, float(t))
            hit = self._memo.get(key)
            if hit is not None:
                return hit.copy()
        tau = 2.0 * np.asarray(t, dtype=float) / self.horizon - 1.0
        out = np.moveaxis(cheb.chebval(tau, coeffs.T), 0, -1)
        if scalar:
            if len(self._memo) >= 256:
                self._memo.clear()
            self._memo[key] = out.copy()
        return out

    def position(self, t):
        return self._eval(self._c0, t)

    def velocity(self, t):
        return self._eval(self._d1, t, 1)

    def acceleration(self, t):
        return self._eval(self._d2, t, 2)

    __call__ = position

    def energy(self):
        """Integral of ||acceleration||^2 over the horizon (exact Gauss-Legendre).

        Evaluated pointwise rather than as a quadratic form in the monomial
        coefficients, which cancels badly once coefficients are large.
        """
        nodes, weights = legendre.leggauss(max(self.n_coeffs, 2))
        t = 0.5 * self.horizon * (nodes + 1.0)
        acc = self.acceleration(t)
        return 0.5 * self.horizon * float(np.sum(weights * np.sum(acc**2, axis=-1)))


def _cheb_accel_gram(n_coeffs, horizon):
    # H[j, k] = int_0^T T_j''(tau(t)) T_k''(tau(t)) dt with tau = 2t/T - 1
    nodes, weights = legendre.leggauss(max(n_coeffs, 2))
    second = np.zeros((n_coeffs, n_coeffs))
    for j in range(n_coeffs):
        second[j] = cheb.chebval(nodes, cheb.chebder(np.eye(n_coeffs)[j], 2)) if j >= 2 else 0.0
    scale = (2.0 / horizon) ** 4 * (horizon / 2.0)
    return scale * (second * weights) @ second.T


def fit_min_acceleration_path(waypoints, degree=30):
    """Minimum-acceleration polynomial path through ``waypoints``.

    ``degree`` is the number of polynomial coefficients per coordinate. Each
    coordinate solves the equality-constrained QP

        min  a^T H a   s.t.  V a = waypoint values

    through its KKT system, posed in a Chebyshev basis in normalized time
    (well conditioned) and solved by complete-pivoting elimination. The path
    keeps the Chebyshev coefficients; ``monomial_coefficients`` converts.

    Raises
    ------
    Singular
        If the KKT matrix is rank deficient (e.g. repeated waypoint times).
    """
    w = waypoints
    n_pts = w.points.shape[0]
    if degree < n_pts:
        raise ValueError(f"need at least {n_pts} coefficients to interpolate {n_pts} waypoints")
    T = w.horizon
    tau = 2.0 * w.times / T - 1.0
    H = _cheb_accel_gram(degree, T)
    V = cheb.chebvander(tau, degree - 1)
    K = np.zeros((degree + n_pts, degree + n_pts))
    K[:degree, :degree] = 2.0 * H
    K[:degree, degree:] = V.T
    K[degree:, :degree] = V
    coeffs = []
    for d in range(w.k):
        rhs = np.concatenate([np.zeros(degree), w.points[:, d]])
        a = solve_full_pivot(K, rhs)[:degree]
        coeffs.append(a)
    return PolynomialPath(np.array(coeffs), horizon=T, basis="chebyshev")


def target_paths(seed=0, L=5, degree=30, count=2, k=2, horizon=1.0):
    """Independent waypoint draws per target, each fitted with the min-acceleration QP."""
    seeds = np.random.SeedSequence(seed).spawn(count)
    return [fit_min_acceleration_path(generate_waypoints(s, L, k, horizon), degree) for s in seeds]


# -- switching single-agent objective ----------------------------------------

def switch_weight(t, t_int, gamma):
    """S(t) = 1 - 1/(1 + exp(-gamma (t - t_int))) and its derivative."""
    S = expit(-gamma * (t - t_int))
    return S, -gamma * S * (1.0 - S)


def switching_objective(paths, t_int=0.5, gamma_switch=20.0):
    """f0(x, t) = S(t)||x - y1(t)||^2 + (1 - S(t))||x - y2(t)||^2, no constraints."""
    y1, y2 = paths
    if y1.k != y2.k or y1.horizon != y2.horizon:
        raise ValueError("paths must share dimension and horizon")
    n = y1.k
    hess = 2.0 * np.eye(n)

    def blend(t):
        S, S_dot = switch_weight(t, t_int, gamma_switch)
        p1, p2 = y1.position(t), y2.position(t)
        return S, S_dot, p1, p2

    def value(x, t):
        S, _, p1, p2 = blend(t)
        return S * np.sum((x - p1) ** 2) + (1.0 - S) * np.sum((x - p2) ** 2)

    def gradient(x, t):
        S, _, p1, p2 = blend(t)
        return 2.0 * (x - (S * p1 + (1.0 - S) * p2))

    def time_cross(x, t):
        S, S_dot, p1, p2 = blend(t)
        v1, v2 = y1.velocity(t), y2.velocity(t)
        return 2.0 * S_dot * (p2 - p1) - 2.0 * (S * v1 + (1.0 - S) * v2)

    def time_partial(x, t):
        S, S_dot, p1, p2 = blend(t)
        v1, v2 = y1.velocity(t), y2.velocity(t)
        d1, d2 = x - p1, x - p2
        return S_dot * (d1 @ d1 - d2 @ d2) - 2.0 * (S * d1 @ v1 + (1.0 - S) * d2 @ v2)

    f0 = ScalarField(n, value, gradient, lambda x, t: hess, time_cross, time_partial)

    def optimum(t):
        S, _, p1, p2 = blend(t)
        return S * p1 + (1.0 - S) * p2

    return TrackingProblem(f0, (), m=2.0, name="switching",
                           meta={"paths": paths, "t_int": t_int, "gamma_switch": gamma_switch,
                                 "optimum": optimum})


# -- two agents, two targets ---------------------------------------------------

def _proximity_constraint(path, r, block, n):
    """f(x, t) = ||x_block - y(t)||^2 - r^2 on the 2-D block of a stacked state."""
    sl = slice(2 * block, 2 * block + 2)
    hess = np.zeros((n, n))
    hess[sl, sl] = 2.0 * np.eye(2)

    def value(x, t):
        d = x[sl] - path.position(t)
        return d @ d - r * r

    def gradient(x, t):
        g = np.zeros(n)
        g[sl] = 2.0 * (x[sl] - path.position(t))
        return g

    def time_cross(x, t):
        g = np.zeros(n)
        g[sl] = -2.0 * path.velocity(t)
        return g

    def time_partial(x, t):
        return -2.0 * (x[sl] - path.position(t)) @ path.velocity(t)

    return ScalarField(n, value, gradient, lambda x, t: hess, time_cross, time_partial)


def _agent_distance(n=4):
    D = np.kron(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.eye(2))
    H = 2.0 * D
    zero = np.zeros(n)
    return ScalarField(
        n,
        value=lambda x, t: float(x @ D @ x),
        gradient=lambda x, t: H @ x,
        hessian=lambda x, t: H,
        time_cross=lambda x, t: zero,
        time_partial=lambda x, t: 0.0,
    )


def two_agent_problem(paths, r=0.05, c0=1.0, m_samples=64, seed=0):
    """Two planar agents x = (x1, x2) minimizing ||x1 - x2||^2 subject to
    ||x_i - y_i(t)||^2 <= r^2.

    The objective is only positive semidefinite, so the declared ``m`` is the
    smallest barrier-Hessian eigenvalue (coefficient ``c0``, zero slack) over
    ``m_samples`` seeded points inside the feasible discs at t = 0. It is used
    for bound reporting only.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if any(p.k != 2 for p in paths):
        raise ValueError("two_agent_problem expects planar paths")
    n = 4
    f0 = _agent_distance(n)
    cons = tuple(_proximity_constraint(p, r, i, n) for i, p in enumerate(paths))
    m = _sampled_barrier_curvature(f0, cons, paths, r, c0, m_samples, seed)
    return TrackingProblem(f0, cons, m=m, name="two-agent", meta={"paths": paths, "r": r})


def _sampled_barrier_curvature(f0, cons, paths, r, c0, count, seed):
    from .barrier import BarrierField
    from .schedules import ScheduleParams

    probe = BarrierField(TrackingProblem(f0, cons, m=1.0), ScheduleParams(c0=c0, gamma_c=0.0, s0=0.0))
    rng = np.random.default_rng(seed)
    centers = np.concatenate([p.position(0.0) for p in paths])
    lowest = np.inf
    for _ in range(count):
        angle = rng.uniform(0.0, 2 * np.pi, size=2)
        radius = r * np.sqrt(rng.uniform(0.0, 0.95, size=2))
        offset = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)]).ravel()
        lowest = min(lowest, np.linalg.eigvalsh(probe.hessian(centers + offset, 0.0))[0])
    return float(lowest)
