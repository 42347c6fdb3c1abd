from __future__ import annotations

import math

import numpy as np
import pytest

from erdim import fitting
from erdim.errors import ObjectiveError, ValidationError
from erdim.lindblad import EmbeddingParams, MarkovParams, Trajectory


def rosenbrock(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


def test_quadratic_bowl():
    c = np.array([1.5, -2.0, 0.25])
    res = fitting.nelder_mead(lambda x: float(np.sum((x - c) ** 2)), np.zeros(3), tol=1e-12)
    assert res.converged
    np.testing.assert_allclose(res.x, c, atol=1e-8)
    assert res.mse >= 0


def test_rosenbrock_with_restarts():
    res = fitting.nelder_mead(rosenbrock, [-1.2, 1.0], restarts=3, tol=1e-12, seed=7)
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-6)


def test_determinism():
    a = fitting.nelder_mead(rosenbrock, [-1.2, 1.0], restarts=2, seed=42, max_evals=500)
    b = fitting.nelder_mead(rosenbrock, [-1.2, 1.0], restarts=2, seed=42, max_evals=500)
    assert a.x.tobytes() == b.x.tobytes()
    assert a.mse == b.mse and a.evaluations == b.evaluations and a.history == b.history


def test_budget_respected():
    res = fitting.nelder_mead(rosenbrock, [-1.2, 1.0], max_evals=50)
    assert res.evaluations <= 50 + 3  # a shrink step may finish its simplex


def test_history_non_increasing():
    res = fitting.nelder_mead(rosenbrock, [-1.2, 1.0], restarts=2, seed=1)
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))


def test_non_finite_objective_reports_point():
    def f(x):
        return math.inf if x[0] > 0.05 else float(x[0] ** 2)

    with pytest.raises(ObjectiveError) as info:
        fitting.nelder_mead(f, [0.0], step=0.1)
    assert info.value.point[0] > 0.05


def test_names_length_checked():
    with pytest.raises(ValidationError):
        fitting.nelder_mead(rosenbrock, [0.0, 0.0], names=("a",))


def gad_target(down, up, times):
    return Trajectory(times, {"sigma_z": fitting.markov_sigma_z(MarkovParams(1.0, down, up), times)})


def test_fit_markov_recovers_rates():
    times = np.linspace(0, 8, 81)
    res = fitting.fit_markov(gad_target(1.0, 0.3, times), 1.0, seed=0)
    assert res.params["gamma_down"] == pytest.approx(1.0, rel=1e-3)
    assert res.params["gamma_up"] == pytest.approx(0.3, rel=1e-3)
    assert res.params["gamma_down"] >= 0 and res.params["gamma_up"] >= 0


def test_fit_markov_mse_matches_analytic_population():
    times = np.linspace(0, 6, 61)
    target_sz = np.cos(2 * times) * np.exp(-0.3 * times)
    res = fitting.fit_markov(Trajectory(times, {"sigma_z": target_sz}), 1.0, seed=3)
    down, up = res.params["gamma_down"], res.params["gamma_up"]
    p_inf = up / (down + up)
    pop = p_inf + (1 - p_inf) * np.exp(-(down + up) * times)
    assert abs(np.mean((2 * pop - 1 - target_sz) ** 2) - res.mse) <= 1e-10
    assert res.mse > 0


def test_fit_requires_sigma_z():
    with pytest.raises(ValidationError):
        fitting.fit_markov(Trajectory(np.linspace(0, 1, 3), {}), 1.0)


def test_embedding_self_consistency():
    true = EmbeddingParams(1.0, 1.1, 0.4, 0.05, 0.01, 0.3, 0.02)
    times = np.linspace(0, 20, 101)
    target = Trajectory(times, {"sigma_z": fitting.embedding_sigma_z(true, times)})
    res = fitting.fit_embedding(target, seed=0, omega=1.0)
    assert res.mse <= 1e-6
    assert all(res.params[k] >= 0 for k in EmbeddingParams.NAMES[3:])


def test_embedding_warm_start_never_worse_than_markov():
    times = np.linspace(0, 30, 121)
    sz = np.cos(1.3 * times) * np.exp(-0.1 * times)
    target = Trajectory(times, {"sigma_z": sz})
    markov = fitting.fit_markov(target, 1.0, seed=0, max_evals=600)
    warm = fitting.fit_embedding(target, seed=0, x0=fitting.embedding_start(markov), max_evals=600)
    assert warm.mse <= markov.mse + 1e-5


def test_embedding_start_reproduces_markov_curve():
    times = np.linspace(0, 10, 51)
    markov = fitting.fit_markov(gad_target(0.6, 0.2, times), 1.0, seed=0)
    x0 = fitting.embedding_start(markov)
    p = fitting._embedding_from_x(x0)
    curve = fitting.embedding_sigma_z(p, times)
    ref = fitting.markov_sigma_z(MarkovParams(**markov.params), times)
    np.testing.assert_allclose(curve, ref, atol=1e-12)
