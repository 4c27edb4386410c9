import numpy as np
import pytest

from pcipm import TrackingProblem, affine_field, quadratic_field
from pcipm.scenarios import target_paths


@pytest.fixture
def one_d():
    """min x^2 s.t. x + 1 <= 0: x* = -1, lambda* = 2."""
    return TrackingProblem(quadratic_field([[2.0]]), [affine_field([1.0], -1.0)], m=2.0)


@pytest.fixture
def one_d_upper():
    """f0 = x^2, f1 = x - 1 (the 1-D barrier instance)."""
    return TrackingProblem(quadratic_field([[2.0]]), [affine_field([1.0], 1.0)], m=2.0)


@pytest.fixture(scope="session")
def paths():
    return target_paths(seed=0, L=5, degree=30)


def random_spd(rng, n, cond=None):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    if cond is None:
        eig = rng.uniform(0.5, 5.0, size=n)
    else:
        eig = np.geomspace(1.0, cond, n)
    return (Q * eig) @ Q.T


@pytest.fixture(scope="session")
def two_agent_run(tmp_path_factory):
    """Reference two-agent run at default settings: (trace, seconds, csv path)."""
    import time
    from pcipm.harness import RunConfig, run_scenario
    out = tmp_path_factory.mktemp("two_agent") / "trace.csv"
    t0 = time.perf_counter()
    trace = run_scenario(RunConfig(scenario="two-agent", out=str(out)))
    return trace, time.perf_counter() - t0, out


@pytest.fixture(scope="session")
def switching_run(tmp_path_factory):
    """Switching run at sigma 10, max_step 1e-3, t_end 0.5: (trace, seconds, csv path)."""
    import time
    from pcipm.harness import RunConfig, run_scenario
    out = tmp_path_factory.mktemp("switching") / "trace.csv"
    cfg = RunConfig(scenario="switching", sigma=10.0, max_step=1e-3, t_end=0.5,
                    fit_start=0.05, fit_end=0.45, oracle_tol=1e-10, out=str(out))
    t0 = time.perf_counter()
    trace = run_scenario(cfg)
    return trace, time.perf_counter() - t0, out
