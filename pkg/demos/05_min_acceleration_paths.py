"""Fit minimum-acceleration polynomial paths through random waypoints.

Compares the fitted energy with the natural cubic spline, which is the lower
bound over all twice-differentiable interpolants.
"""
import numpy as np
from scipy.interpolate import CubicSpline

from pcipm import fit_min_acceleration_path, generate_waypoints

for seed in range(3):
    w = generate_waypoints(seed, L=5)
    path = fit_min_acceleration_path(w, degree=30)
    resid = np.max(np.abs(path.position(w.times) - w.points))
    cs = CubicSpline(w.times, w.points, bc_type="natural")
    t = np.linspace(0.0, 1.0, 20001)
    spline = np.trapezoid(np.sum(cs(t, 2) ** 2, axis=1), t)
    print(f"seed {seed}: waypoint residual {resid:.1e}, energy {path.energy():.3f}, "
          f"spline lower bound {spline:.3f}")

p = fit_min_acceleration_path(generate_waypoints(0, L=5), degree=30)
for tk in np.linspace(0, 1, 6):
    print(f"t={tk:.1f}  position {p.position(tk)}  velocity {p.velocity(tk)}")
