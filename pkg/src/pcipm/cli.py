"""Command line: ``pcipm run``, ``pcipm validate`` and ``pcipm sweep``.

Exit codes: 0 every bound check passed, 1 a bound or derivative check failed,
2 the run itself failed (bad configuration, step collapse, infeasibility, IO).
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .barrier import BarrierField
from .errors import PcipmError
from .harness import (SCENARIOS, RunConfig, build_scenario, config_from_mapping, emit_summary,
                      exit_code, load_config, run_scenario, run_sweep, write_sweep)
from .problem import validate_derivatives
from .schedules import initial_slack

# flag name -> RunConfig field
FLAGS = {
    "scenario": "scenario", "sigma": "sigma", "gamma_c": "gamma_c", "alpha": "alpha",
    "c0": "c0", "s0": "s0", "epsilon": "epsilon", "t_end": "t_end", "max_step": "max_step",
    "sample_interval": "sample_interval", "seed": "seed", "degree": "degree", "out": "out",
    "oracle_tol": "oracle_tol", "problem_file": "problem_file",
}


def _common(p, sweep=False):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--problem-file", help="python file defining build(config) -> (problem, x0)")
    if not sweep:
        p.add_argument("--sigma")
        p.add_argument("--gamma-c")
        p.add_argument("--alpha")
    p.add_argument("--c0")
    p.add_argument("--s0", help="'auto' or a nonnegative value")
    p.add_argument("--epsilon")
    p.add_argument("--t-end")
    p.add_argument("--max-step")
    p.add_argument("--sample-interval")
    p.add_argument("--seed")
    p.add_argument("--degree")
    p.add_argument("--oracle-tol")
    p.add_argument("--out", help="output CSV path")


def build_parser():
    parser = argparse.ArgumentParser(prog="pcipm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="integrate a scenario, evaluate oracles, write CSV"))
    v = sub.add_parser("validate", help="finite-difference checks of every field of a scenario")
    _common(v)
    v.add_argument("--points", type=int, default=100)
    s = sub.add_parser("sweep", help="grid over sigma, gamma_c, alpha; one summary row per cell")
    _common(s, sweep=True)
    s.add_argument("--sigma", default=None, help="comma-separated list")
    s.add_argument("--gamma-c", default=None, help="comma-separated list")
    s.add_argument("--alpha", default=None, help="comma-separated list")
    return parser


def config_from_args(args, skip=()):
    base = load_config(args.config) if args.config else RunConfig()
    values = {}
    for flag, name in FLAGS.items():
        if flag in skip:
            continue
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    return config_from_mapping(values, base)


def _floats(text, default):
    if text is None:
        return [default]
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_run(args):
    cfg = config_from_args(args)
    trace = run_scenario(cfg)
    print(emit_summary(trace))
    if cfg.out:
        print(f"wrote {cfg.out}")
    return exit_code(trace)


def cmd_validate(args):
    cfg = config_from_args(args)
    problem, x0 = build_scenario(cfg)
    rng = np.random.default_rng(cfg.seed)
    fields = [("objective", problem.objective)]
    fields += [(f"constraint {i + 1}", f) for i, f in enumerate(problem.constraints)]
    barrier = None
    if problem.p:
        s0 = initial_slack(problem, x0, cfg.epsilon) if cfg.s0 == "auto" else float(cfg.s0)
        barrier = BarrierField(problem, cfg.schedule_params(s0))
        fields.append(("barrier", barrier))
    ok = True
    for name, fld in fields:
        worst = {}
        for _ in range(args.points):
            t = rng.uniform(0.0, max(cfg.t_end, 1e-3))
            x = x0 + rng.normal(scale=0.1, size=problem.n)
            if fld is barrier:
                x = _interior_point(problem, barrier, x, t, rng)
            rep = validate_derivatives(fld, x, t)
            for k, e in rep.errors.items():
                worst[k] = max(worst.get(k, 0.0), e)
        passed = all(e <= 1e-5 for e in worst.values())
        ok &= passed
        print(f"{name:<14s} " + "  ".join(f"{k} {e:.2e}" for k, e in worst.items())
              + ("  ok" if passed else "  FAIL"))
    return 0 if ok else 1


def _interior_point(problem, barrier, x, t, rng):
    # shrink toward the constraint centres until strictly inside the domain
    centres = _centres(problem, t, x)
    for _ in range(60):
        if barrier.in_domain(x, t):
            return x
        x = centres + 0.5 * (x - centres)
    raise PcipmError(f"no interior sample found at t={t:.6g}")


def _centres(problem, t, x):
    paths = problem.meta.get("paths")
    if paths is not None and problem.name == "two-agent":
        return np.concatenate([p.position(t) for p in paths])
    from .oracle import find_interior_point
    return find_interior_point(problem, t, 0.0, x)


def cmd_sweep(args):
    cfg = config_from_args(args, skip=("sigma", "gamma_c", "alpha", "out"))
    rows = run_sweep(cfg, _floats(args.sigma, cfg.gain_sigma), _floats(args.gamma_c, cfg.gamma_c),
                     _floats(args.alpha, cfg.alpha))
    out = args.out or "sweep.csv"
    write_sweep(rows, out)
    for row in rows:
        print(" ".join(str(v) for v in row[:10]))
    print(f"wrote {out}")
    codes = [row[9] for row in rows]
    return 2 if 2 in codes else (1 if 1 in codes else 0)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return {"run": cmd_run, "validate": cmd_validate, "sweep": cmd_sweep}[args.command](args)
    except (PcipmError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
