import numpy as np
import pytest
from scipy.optimize import nnls as scipy_nnls

from synthbound.errors import ConvergenceError
from synthbound.solvers import active_set_lsq

from oracles import nnls_enumerate, simplex_enumerate, sse


def random_problem(rng, m, n, signal="mixed"):
    X = rng.normal(size=(m, n)) + rng.uniform(0, 3, size=n)
    if signal == "mixed":
        beta = rng.normal(size=n)
    else:
        beta = rng.dirichlet(np.ones(n))
    y = X @ beta + 0.3 * rng.normal(size=m)
    return X, y


@pytest.mark.parametrize("seed", range(40))
def test_nnls_matches_enumeration_and_scipy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    X, y = random_problem(rng, int(rng.integers(n + 2, 30)), n)
    b, _ = active_set_lsq(X, y)
    assert np.all(b >= 0)
    ref = nnls_enumerate(X, y)
    assert sse(X, y, b) == pytest.approx(sse(X, y, ref), rel=1e-10, abs=1e-12)
    np.testing.assert_allclose(b, ref, atol=1e-8)
    np.testing.assert_allclose(b, scipy_nnls(X, y)[0], atol=1e-8)


@pytest.mark.parametrize("seed", range(40))
def test_simplex_matches_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(1, 7))
    X, y = random_problem(rng, int(rng.integers(n + 2, 30)), n, signal="simplex")
    b, _ = active_set_lsq(X, y, simplex=True)
    assert np.all(b >= 0)
    assert abs(b.sum() - 1) <= 1e-10
    ref = simplex_enumerate(X, y)
    assert sse(X, y, b) == pytest.approx(sse(X, y, ref), rel=1e-10, abs=1e-12)
    np.testing.assert_allclose(b, ref, atol=1e-8)


def test_simplex_outside_hull_picks_vertex():
    X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    y = 3 * X[:, 0]
    b, _ = active_set_lsq(X, y, simplex=True)
    np.testing.assert_allclose(b, [1.0, 0.0], atol=1e-12)


def test_nnls_all_negative_target_gives_zero():
    X = np.abs(np.random.default_rng(0).normal(size=(10, 3)))
    b, _ = active_set_lsq(X, -np.ones(10))
    assert np.all(b == 0)


def test_iteration_cap_raises():
    rng = np.random.default_rng(3)
    X, y = random_problem(rng, 30, 6)
    with pytest.raises(ConvergenceError):
        active_set_lsq(X, y, maxiter=1)


def test_empty_problem():
    b, it = active_set_lsq(np.zeros((5, 0)), np.ones(5))
    assert b.shape == (0,) and it == 0
