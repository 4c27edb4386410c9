import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcipm.errors import NotPositiveDefinite, Singular
from pcipm.linalg import check_symmetric, solve_full_pivot, solve_spd, solve_symmetric_indefinite

from conftest import random_spd


def residual_ok(A, x, b, factor=1e-10):
    return np.linalg.norm(A @ x - b) <= factor * (np.linalg.norm(A, 2) * np.linalg.norm(x) + np.linalg.norm(b))


def test_spd_identity():
    assert np.allclose(solve_spd(np.eye(2), [3.0, -1.0]), [3.0, -1.0])


def test_spd_diagonal():
    A = np.diag([4.0, 9.0])
    x = solve_spd(A, [8.0, 27.0])
    assert np.allclose(x, [2.0, 3.0])
    assert np.linalg.norm(A @ x - [8.0, 27.0]) <= 1e-12


def test_spd_pivot_failure():
    A = np.array([[2.0, -1.0], [-1.0, 2.0]]) - 3.0 * np.eye(2)
    with pytest.raises(NotPositiveDefinite):
        solve_spd(A, [1.0, 1.0])


def test_asymmetric_rejected():
    with pytest.raises(ValueError):
        check_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_saddle_hand_solve():
    K = np.array([[2.0, 0, 1], [0, 2.0, 1], [1, 1, 0]])
    b = np.array([0.0, 0.0, 2.0])
    x = solve_symmetric_indefinite(K, b)
    assert np.allclose(x, [1.0, 1.0, -2.0])
    assert residual_ok(K, x, b)


def test_indefinite_identity():
    e1 = np.array([1.0, 0.0, 0.0])
    assert np.allclose(solve_symmetric_indefinite(np.eye(3), e1), e1)


def test_duplicated_row_singular():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    K = np.zeros((4, 4))
    K[:2, :2] = 2 * np.eye(2)
    K[:2, 2:] = A.T
    K[2:, :2] = A
    with pytest.raises(Singular):
        solve_symmetric_indefinite(K, np.ones(4))
    with pytest.raises(Singular):
        solve_full_pivot(K, np.ones(4))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 20), seed=st.integers(0, 2**32 - 1))
def test_random_spd_residual(n, seed):
    rng = np.random.default_rng(seed)
    A = random_spd(rng, n)
    b = rng.normal(size=n)
    assert residual_ok(A, solve_spd(A, b), b)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 14), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_random_saddle_residual(n, seed, data):
    p = data.draw(st.integers(1, n - 1))
    rng = np.random.default_rng(seed)
    H = random_spd(rng, n)
    A = rng.normal(size=(p, n))
    K = np.block([[H, A.T], [A, np.zeros((p, p))]])
    b = rng.normal(size=n + p)
    assert residual_ok(K, solve_symmetric_indefinite(K, b), b)
    assert residual_ok(K, solve_full_pivot(K, b), b)


@pytest.mark.parametrize("cond", [1e2, 1e4, 1e6])
def test_spd_recovers_solution(cond):
    rng = np.random.default_rng(3)
    A = random_spd(rng, 12, cond)
    y = rng.normal(size=12)
    x = solve_spd(A, A @ y)
    assert np.linalg.norm(x - y) <= 1e-8 * np.linalg.norm(y)
