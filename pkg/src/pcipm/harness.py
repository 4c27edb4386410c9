"""Run configuration, scenario runs, traces, CSV export and summaries.

A run builds a scenario, integrates the matching flow, and afterwards visits
every recorded sample with the frozen-time oracles: x*(t) and, for
constrained problems, x~*(t), z~*(t) and the two suboptimality bounds.
"""
from __future__ import annotations

import csv
import dataclasses
import importlib.util
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import stats

from .barrier import BarrierField
from .errors import NonPositiveValue
from .flows import (FlowState, GainMatrix, IntegratorOptions, equality_flow, integrate,
                    interior_point_flow, unconstrained_flow)
from .oracle import BOUND_SLACK, evaluate_bounds, static_minimize_unconstrained, static_solve_equality
from .problem import lagrangian_field
from .scenarios import switching_objective, target_paths, two_agent_problem
from .schedules import ScheduleParams, initial_slack

SCENARIOS = ("switching", "two-agent", "custom-file")
DEFAULT_SIGMA = {"switching": 10.0, "two-agent": 50.0, "custom-file": 1.0}
# slack factor on the unconstrained tracking bound (2/m) |grad f0(x0, 0)| e^{-sigma t}
TRACKING_FACTOR = 1.1


@dataclass
class RunConfig:
    scenario: str = "switching"
    sigma: Optional[float] = None  # None: scenario default (10 or 50)
    P: Optional[tuple] = None  # explicit gain rows, overrides sigma * I
    gamma_c: float = 6.0
    alpha: float = 10.0
    c0: float = 1.0
    s0: object = "auto"  # "auto" or a nonnegative number
    epsilon: Optional[float] = None
    t_end: float = 1.0
    max_step: float = 0.01
    min_step: float = 1e-7
    shrink: float = 0.5
    sample_interval: float = 0.005
    seed: int = 0
    degree: int = 30
    L: int = 5
    t_int: float = 0.5
    gamma_switch: float = 20.0
    r: float = 0.05
    x0: Optional[tuple] = None
    oracle_tol: float = 1e-9
    fit_start: float = 0.05
    fit_end: Optional[float] = None
    problem_file: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.scenario == "custom-file" and not self.problem_file:
            raise ValueError("custom-file scenario needs problem_file")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if isinstance(self.s0, str):
            if self.s0 != "auto":
                raise ValueError("s0 must be 'auto' or a number")
        elif self.s0 < 0:
            raise ValueError("s0 must be nonnegative")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")
        if not self.oracle_tol > 0:
            raise ValueError("oracle_tol must be positive")
        if self.degree < self.L + 2:
            raise ValueError("degree must be at least L + 2")
        if not self.r > 0:
            raise ValueError("r must be positive")
        # schedule and integrator ranges are checked by their own types
        self.schedule_params(0.0)
        self.integrator_options()

    @property
    def gain_sigma(self):
        return DEFAULT_SIGMA[self.scenario] if self.sigma is None else float(self.sigma)

    def gain(self, n):
        if self.P is None:
            return GainMatrix.isotropic(self.gain_sigma, n)
        P = np.array(self.P, dtype=float)
        return GainMatrix(P, float(np.linalg.eigvalsh(P)[0]))

    def schedule_params(self, s0):
        return ScheduleParams(c0=self.c0, gamma_c=self.gamma_c, s0=s0, alpha=self.alpha)

    def integrator_options(self):
        return IntegratorOptions(max_step=self.max_step, min_step=self.min_step,
                                 shrink=self.shrink, sample_interval=self.sample_interval)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


# -- flat key=value config files ------------------------------------------------

def _format_value(v):
    if v is None:
        return "none"
    if isinstance(v, (tuple, list)):
        if v and isinstance(v[0], (tuple, list)):
            return ";".join(",".join(repr(float(a)) for a in row) for row in v)
        return ",".join(repr(float(a)) for a in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_value(name, text, kind):
    text = text.strip()
    if text.lower() == "none":
        return None
    if name == "P":
        return tuple(tuple(float(a) for a in row.split(",")) for row in text.split(";"))
    if name == "x0":
        return tuple(float(a) for a in text.split(","))
    if name == "s0":
        return "auto" if text == "auto" else float(text)
    kind = str(kind)  # annotations are strings here
    if kind == "int":
        return int(text)
    if "str" in kind:
        return text
    return float(text)


def config_from_mapping(values, base=None):
    """Build a RunConfig from a {key: text} mapping; keys may use '-' or '_'."""
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    changes = {}
    for key, text in values.items():
        name = key.strip().replace("-", "_")
        if name not in fields:
            raise ValueError(f"unknown config key {key!r}")
        changes[name] = _parse_value(name, text, fields[name])
    base = base or RunConfig()
    return dataclasses.replace(base, **changes)


def parse_config(text, base=None):
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key] = value
    return config_from_mapping(values, base)


def load_config(path, base=None):
    return parse_config(Path(path).read_text(encoding="utf-8"), base)


def dump_config(config):
    lines = [f"{f.name} = {_format_value(getattr(config, f.name))}" for f in dataclasses.fields(config)]
    return "\n".join(lines) + "\n"


# -- scenario construction --------------------------------------------------------

def _load_problem_file(path):
    spec = importlib.util.spec_from_file_location("pcipm_custom_problem", path)
    if spec is None:
        raise ValueError(f"cannot load problem file {path!r}")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    if not hasattr(module, "build"):
        raise ValueError(f"{path}: problem file must define build(config) -> (problem, x0)")
    return module.build


def build_scenario(config):
    """Return ``(problem, x0)`` for the configured scenario.

    Both built-in scenarios start at the origin unless ``x0`` is given.
    """
    if config.scenario == "custom-file":
        problem, x0 = _load_problem_file(config.problem_file)(config)
    else:
        paths = target_paths(config.seed, config.L, config.degree)
        if config.scenario == "switching":
            problem = switching_objective(paths, config.t_int, config.gamma_switch)
        else:
            problem = two_agent_problem(paths, config.r, c0=config.c0, seed=config.seed)
        x0 = None
    if config.x0 is not None:
        x0 = config.x0
    n = problem.n
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ValueError(f"x0 has shape {x0.shape}, problem dimension is {n}")
    return problem, x0


# -- traces ------------------------------------------------------------------------

@dataclass
class Sample:
    t: float
    x: np.ndarray
    x_star: np.ndarray
    err: float
    grad_norm: float
    fvals: np.ndarray
    pert_gap: float = 0.0
    pert_bound: float = 0.0
    barrier_gap: float = 0.0
    barrier_bound: float = 0.0
    steps: int = 0
    rejects: int = 0
    lambda_star: Optional[np.ndarray] = None
    x_tilde_star: Optional[np.ndarray] = None
    z_tilde_star: Optional[np.ndarray] = None


@dataclass
class RunTrace:
    config: RunConfig
    n: int
    p: int
    kind: str  # "unconstrained", "equality" or "interior-point"
    sigma: float
    m: float
    grad0: float  # |grad f0(x0, 0)| (or of the Lagrangian / barrier)
    s0: float = 0.0
    samples: list = field(default_factory=list)
    evaluations: int = 0
    regularized: int = 0

    def column(self, name):
        return np.array([getattr(s, name) for s in self.samples])

    @property
    def times(self):
        return self.column("t")

    @property
    def constrained(self):
        return self.kind == "interior-point"


def run_scenario(config, write_csv=True):
    """Build, integrate, evaluate oracles at every sample, and optionally write the CSV.

    ``StepCollapse`` from the integrator and ``InfeasibleAtTime`` from the
    oracles propagate; both carry the time at which they occurred.
    """
    problem, x0 = build_scenario(config)
    opts = config.integrator_options()
    t_end = float(config.t_end)

    if problem.equality is not None:
        kind = "equality"
        L = lagrangian_field(problem)
        p_eq = L.dim - problem.n
        gain = config.gain(L.dim)
        flow = equality_flow(problem, gain)
        state0 = FlowState(0.0, x0, lam=np.zeros(p_eq))
        grad0 = float(np.linalg.norm(L.gradient(state0.z, 0.0)))
        schedule, s0 = None, 0.0
    elif problem.p:
        kind = "interior-point"
        s0 = initial_slack(problem, x0, config.epsilon) if config.s0 == "auto" else float(config.s0)
        schedule = config.schedule_params(s0)
        barrier = BarrierField(problem, schedule)
        barrier.margins(x0, 0.0)
        gain = config.gain(problem.n)
        flow = interior_point_flow(barrier, gain)
        state0 = FlowState(0.0, x0)
        grad0 = float(np.linalg.norm(barrier.gradient(x0, 0.0)))
    else:
        kind = "unconstrained"
        gain = config.gain(problem.n)
        flow = unconstrained_flow(problem, gain)
        state0 = FlowState(0.0, x0)
        grad0 = float(np.linalg.norm(problem.objective.gradient(x0, 0.0)))
        schedule, s0 = None, 0.0

    result = integrate(flow, state0, t_end, opts)
    trace = RunTrace(config=config, n=problem.n, p=problem.p, kind=kind, sigma=gain.sigma,
                     m=problem.m, grad0=grad0, s0=s0, evaluations=flow.evaluations,
                     regularized=flow.regularized)

    tol = config.oracle_tol
    for st in result.samples:
        t, x = st.t, st.x
        fvals = problem.constraint_values(x, t)
        rec = Sample(t=t, x=x, x_star=None, err=0.0, grad_norm=0.0, fvals=fvals,
                     steps=st.step_count, rejects=st.reject_count)
        if kind == "unconstrained":
            sol = static_minimize_unconstrained(problem.objective, t, x, tol)
            rec.x_star = sol.x_star
            rec.grad_norm = float(np.linalg.norm(problem.objective.gradient(x, t)))
        elif kind == "equality":
            z_star = static_solve_equality(problem, t, tol, st.z)
            rec.x_star = z_star[:problem.n]
            rec.lambda_star = z_star[problem.n:]
            rec.grad_norm = float(np.linalg.norm(L.gradient(st.z, t)))
        else:
            rep = evaluate_bounds(problem, schedule, t, tol=tol, x_init=x)
            rec.x_star = rep.x_star
            rec.lambda_star = rep.lambda_star
            rec.x_tilde_star = rep.x_tilde_star
            rec.z_tilde_star = rep.z_tilde_star
            rec.grad_norm = float(np.linalg.norm(barrier.gradient(x, t)))
            rec.pert_gap, rec.pert_bound = rep.perturbation_gap, rep.perturbation_bound
            rec.barrier_gap, rec.barrier_bound = rep.barrier_gap, rep.barrier_bound
        rec.err = float(np.linalg.norm(x - rec.x_star))
        trace.samples.append(rec)

    if write_csv and config.out:
        emit_csv(trace, config.out)
    return trace


# -- measurements ---------------------------------------------------------------------

def fit_decay_rate(samples, values=None):
    """Exponential decay rate of positive samples: negated slope of log(value) vs t.

    Accepts a sequence of ``(t, value)`` pairs, or two arrays. Returns
    ``(rate, r_squared)``.
    """
    if values is None:
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("expected (t, value) pairs")
        t, v = arr[:, 0], arr[:, 1]
    else:
        t, v = np.asarray(samples, dtype=float), np.asarray(values, dtype=float)
    if t.size < 10:
        raise NonPositiveValue(f"need at least 10 samples, got {t.size}")
    if np.any(~(v > 0)):
        raise NonPositiveValue("all values must be positive to fit a decay rate")
    fit = stats.linregress(t, np.log(v))
    return float(-fit.slope), float(fit.rvalue**2)


def tracking_bound(trace, t):
    """(2/m) |grad(x0, 0)| e^{-sigma t}, inflated by TRACKING_FACTOR."""
    return TRACKING_FACTOR * (2.0 / trace.m) * trace.grad0 * np.exp(-trace.sigma * np.asarray(t))


def check_flags(trace):
    """Per-check pass flags computed from the trace's numeric fields only."""
    flags = {}
    if trace.constrained:
        pg, pb = trace.column("pert_gap"), trace.column("pert_bound")
        bg, bb = trace.column("barrier_gap"), trace.column("barrier_bound")
        flags["perturbation_bound"] = bool(np.all((pg >= -BOUND_SLACK) & (pg <= pb + BOUND_SLACK)))
        flags["barrier_bound"] = bool(np.all((bg >= -BOUND_SLACK) & (bg <= bb + BOUND_SLACK)))
    elif trace.kind == "unconstrained":
        flags["tracking_bound"] = bool(np.all(trace.column("err") <= tracking_bound(trace, trace.times)))
    return flags


def exit_code(trace):
    return 0 if all(check_flags(trace).values()) else 1


def max_bound_violation(trace):
    """Largest amount by which any gap leaves its [0, bound] interval (<= 0 means none)."""
    if trace.constrained:
        parts = []
        for gap, bound in (("pert_gap", "pert_bound"), ("barrier_gap", "barrier_bound")):
            g, b = trace.column(gap), trace.column(bound)
            parts.append(np.maximum(g - b, -g))
        return float(np.max(np.concatenate(parts)))
    if trace.kind == "unconstrained":
        return float(np.max(trace.column("err") - tracking_bound(trace, trace.times)))
    return 0.0


def decay_fit(trace, column="grad_norm"):
    t, v = trace.times, trace.column(column)
    end = trace.config.fit_end if trace.config.fit_end is not None else trace.config.t_end
    keep = (t >= trace.config.fit_start - 1e-12) & (t <= end + 1e-12)
    return fit_decay_rate(t[keep], v[keep])


def emit_summary(trace):
    """Text table with final error, fitted rates, bound violation and step counts."""
    last = trace.samples[-1]
    rows = [
        ("scenario", trace.config.scenario),
        ("flow", trace.kind),
        ("sigma", f"{trace.sigma:.6g}"),
        ("samples", str(len(trace.samples))),
        ("t_end", f"{last.t:.6g}"),
        ("final error", f"{last.err:.6e}"),
        ("final grad norm", f"{last.grad_norm:.6e}"),
    ]
    for column in ("grad_norm", "err"):
        try:
            rate, r2 = decay_fit(trace, column)
            rows.append((f"rate({column})", f"{rate:.6g}  (r^2 {r2:.6f})"))
        except NonPositiveValue as exc:
            rows.append((f"rate({column})", f"n/a ({exc})"))
    if trace.p:
        rows.append(("max f_i over last 20%", f"{_late_max_constraint(trace):.6e}"))
        rows.append(("s0", f"{trace.s0:.6g}"))
    rows.append(("max bound violation", f"{max_bound_violation(trace):.6e}"))
    rows.append(("steps", str(last.steps)))
    rows.append(("rejects", str(last.rejects)))
    rows.append(("regularized solves", str(trace.regularized)))
    for name, ok in check_flags(trace).items():
        rows.append((name, "pass" if ok else "FAIL"))
    rows.append(("exit", str(exit_code(trace))))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _late_max_constraint(trace):
    t = trace.times
    late = t >= 0.8 * t[-1]
    return float(np.max(np.array([s.fvals for s in trace.samples])[late]))


# -- CSV --------------------------------------------------------------------------------

def csv_header(n, p):
    return (["t"] + [f"x_{i}" for i in range(n)] + [f"xstar_{i}" for i in range(n)]
            + ["err", "grad_norm"] + [f"f_{i}" for i in range(1, p + 1)]
            + ["pert_gap", "pert_bound", "barrier_gap", "barrier_bound", "steps", "rejects"])


def _num(v):
    return "%.17g" % v


def emit_csv(trace, path):
    """One header row, then one row per sample; floats with 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(trace.n, trace.p))
        for s in trace.samples:
            row = [_num(s.t)] + [_num(v) for v in s.x] + [_num(v) for v in s.x_star]
            row += [_num(s.err), _num(s.grad_norm)] + [_num(v) for v in s.fvals]
            row += [_num(s.pert_gap), _num(s.pert_bound), _num(s.barrier_gap), _num(s.barrier_bound)]
            row += [str(int(s.steps)), str(int(s.rejects))]
            w.writerow(row)


def read_csv(path):
    """Return ``(header, data)`` with ``data`` a float array of shape (rows, columns)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(v) for v in row] for row in body], dtype=float).reshape(len(body), len(header))
    return header, data


def trace_table(trace):
    """The CSV's numeric content as an array, without going through a file."""
    rows = []
    for s in trace.samples:
        rows.append(np.concatenate([[s.t], s.x, s.x_star, [s.err, s.grad_norm], s.fvals,
                                    [s.pert_gap, s.pert_bound, s.barrier_gap, s.barrier_bound,
                                     s.steps, s.rejects]]))
    return np.array(rows, dtype=float)


# -- sweeps ---------------------------------------------------------------------------------

SWEEP_HEADER = ["sigma", "gamma_c", "alpha", "final_err", "rate", "r_squared",
                "max_violation", "steps", "rejects", "exit", "error"]


def run_sweep(base, sigmas, gammas, alphas):
    """Run every (sigma, gamma_c, alpha) cell; one summary row per cell.

    A cell that raises records exit 2 and the error text instead of stopping
    the sweep.
    """
    rows = []
    for sigma in sigmas:
        for gamma in gammas:
            for alpha in alphas:
                cfg = base.replace(sigma=sigma, gamma_c=gamma, alpha=alpha, out=None)
                try:
                    tr = run_scenario(cfg, write_csv=False)
                except Exception as exc:  # noqa: BLE001 - recorded per cell
                    rows.append([sigma, gamma, alpha, math.nan, math.nan, math.nan, math.nan,
                                 0, 0, 2, f"{type(exc).__name__}: {exc}"])
                    continue
                try:
                    rate, r2 = decay_fit(tr)
                except NonPositiveValue:
                    rate, r2 = math.nan, math.nan
                last = tr.samples[-1]
                rows.append([sigma, gamma, alpha, last.err, rate, r2, max_bound_violation(tr),
                             last.steps, last.rejects, exit_code(tr), ""])
    return rows


def write_sweep(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow([_num(v) if isinstance(v, float) else v for v in row])
