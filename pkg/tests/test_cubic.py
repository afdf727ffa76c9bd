import numpy as np
import pytest

from greedynewton import CubicConfig, Method, QuadraticProblem, SolverConfig, cubic_subproblem, solve
from greedynewton.cubic import lm_step, model_gradient, step_cubic_linesearch, step_greedy_lm
from greedynewton.solvers import step_pure_newton

from conftest import random_logistic


def test_one_dimensional_radius_equation():
    # f'' = 1, f' = -4, M = 6: (1 + 3r) r = 4 gives r = 1
    p = QuadraticProblem(np.array([[1.0]]), np.array([-4.0]))
    y, r = cubic_subproblem(p, np.zeros(1), 6.0)
    assert r == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(y, [1.0], atol=1e-10)


def test_small_M_recovers_newton(rng):
    p = random_logistic(rng, m=30, n=4, reg=0.5)
    x = rng.standard_normal(4)
    y, _ = cubic_subproblem(p, x, 1e-9)
    x_n, _ = step_pure_newton(p, x, SolverConfig())
    np.testing.assert_allclose(y, x_n, atol=1e-6)


def test_model_stationarity(rng):
    for _ in range(10):
        p = random_logistic(rng, m=30, n=5, reg=0.0, scale=2.0)
        x = 2 * rng.standard_normal(5)
        M = float(rng.uniform(0.1, 50.0))
        y, r = cubic_subproblem(p, x, M)
        res = np.linalg.norm(model_gradient(p, x, y, M))
        assert res < 1e-6 * (1 + np.linalg.norm(p.gradient(x)))
        assert r == pytest.approx(np.linalg.norm(y - x), rel=1e-12)


def test_indefinite_hessian_model():
    p = QuadraticProblem(np.diag([-1.0, 2.0]), np.array([0.5, -1.0]))
    y, r = cubic_subproblem(p, np.zeros(2), 3.0)
    assert np.linalg.norm(model_gradient(p, np.zeros(2), y, 3.0)) < 1e-8
    assert -1.0 + 1.5 * r >= -1e-12


def test_cubic_linesearch_on_quadratic():
    p = QuadraticProblem.centered(np.diag([1.0, 4.0]), np.array([1.0, -1.0]))
    x1, info = step_cubic_linesearch(p, np.zeros(2), 1e-8)
    assert info.step == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(x1, p.minimizer(), atol=1e-6)


def test_cubic_linesearch_never_worse_than_cubic_step():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = random_logistic(rng, m=40, n=5, reg=1.0, scale=2.0)
        x = 2 * rng.standard_normal(5)
        y, _ = cubic_subproblem(p, x, 1.0)
        assert p.gradient(x) @ (y - x) < 0
        _, info = step_cubic_linesearch(p, x, 1.0)
        assert info.f <= info.extras["f_cubic"]
        assert info.extras["f_cubic"] == pytest.approx(p.value(y), rel=1e-14)


def test_greedy_lm_on_quadratic_selects_newton():
    p = QuadraticProblem.centered(np.diag([1.0, 30.0]), np.array([2.0, -1.0]))
    x1, info = step_greedy_lm(p, np.array([5.0, 5.0]))
    assert info.extras["lam"] < 1e-8
    np.testing.assert_allclose(x1, p.minimizer(), atol=1e-8)


def test_large_damping_shrinks_step(rng):
    p = random_logistic(rng, m=30, n=4, reg=0.1)
    x = rng.standard_normal(4)
    assert np.linalg.norm(lm_step(p, x, 1e12) - x) < 1e-9


def test_greedy_lm_beats_damping_grid():
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = random_logistic(rng, m=40, n=5, reg=0.0, scale=2.0)
        x = 2 * rng.standard_normal(5)
        _, info = step_greedy_lm(p, x)
        grid = [0.0] + [10.0**k for k in range(-6, 7)]
        brute = min(p.value(lm_step(p, x, lam + 1e-300)) if lam == 0 else p.value(lm_step(p, x, lam)) for lam in grid)
        assert info.f <= brute + 1e-12 * abs(brute)


def test_greedy_lm_not_worse_than_newton():
    rng = np.random.default_rng(9)
    for _ in range(20):
        p = random_logistic(rng, m=40, n=5, reg=1.0, scale=2.0)
        x = 3 * rng.standard_normal(5)
        _, lm = step_greedy_lm(p, x)
        _, newton = step_pure_newton(p, x, SolverConfig())
        assert lm.f <= newton.f


def test_cubic_methods_through_solver(rng):
    p = random_logistic(rng, m=60, n=5, reg=1.0)
    for cfg in (
        SolverConfig(Method.CUBIC_GREEDY_LM),
        SolverConfig(Method.CUBIC_LINESEARCH, cubic=CubicConfig(M=1.0)),
    ):
        trace = solve(p, cfg)
        assert trace.status == "converged"
        assert np.all(np.diff(trace.f_values) <= 0)


def test_cubic_linesearch_requires_M(rng):
    p = random_logistic(rng, m=10, n=3, reg=1.0)
    with pytest.raises(ValueError):
        solve(p, SolverConfig(Method.CUBIC_LINESEARCH))


def test_config_validation():
    with pytest.raises(ValueError):
        CubicConfig(M=-1.0)
    with pytest.raises(ValueError):
        CubicConfig(lam_min=5.0, lam_max=1.0)
