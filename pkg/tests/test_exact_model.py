from __future__ import annotations

import numpy as np
import pytest

from erdim import exact_model as em
from erdim.complexity import effective_dimension
from erdim.errors import SizeError, StepError, ValidationError


def band(coupling=0.2, n_modes=200, omega=1.5):
    return em.ExactModel.from_continuum(omega, 1.0, 2.0, coupling, n_modes)


def test_model_validation():
    with pytest.raises(ValidationError):
        em.ExactModel(1.0, 2.0, 1.0, 0.1, 0.1)
    with pytest.raises(ValidationError):
        em.ExactModel(1.0, 1.0, 2.0, 0.3, 0.1)
    with pytest.raises(ValidationError):
        em.ExactModel(1.0, 1.0, 2.0, -0.1, 0.1)
    m = em.ExactModel(1.0, 1.0, 2.0, 0.1, 0.05)
    assert m.n_modes == 10
    np.testing.assert_allclose(m.mode_frequencies[[0, -1]], [1.1, 2.0])


def test_amplitude_state_norm():
    with pytest.raises(ValidationError):
        em.AmplitudeState(0.5, np.zeros(3, complex))
    s = em.AmplitudeState.excited(3)
    assert s.sigma_z == 1.0


def test_derived_params_mapping():
    m = em.ExactModel(1.5, 1.0, 2.0, 0.01, 0.001)
    p = em.derived_params(m, 0.05)
    assert (p.n, p.big_t, p.tau) == (2, 1.0, 0.5)
    assert p.gamma == pytest.approx(0.001 * 100)
    assert p.gamma_tau < 1
    with pytest.raises(ValidationError):
        em.derived_params(em.ExactModel(1.5, 1.0, 2.0, 0.01, 0.1), 0.05)


def test_decoupled_finite():
    m = em.ExactModel(1.5, 1.0, 2.0, 0.1, 0.0)
    traj = em.solve_finite(m, np.linspace(0, 10, 11))
    np.testing.assert_allclose(traj.sigma_z, 1.0, atol=1e-14)


def test_single_resonant_mode_closed_form():
    g = 0.3
    m = em.ExactModel(2.0, 1.0, 2.0, 1.0, g)  # the single mode sits at omega_max = 2
    times = np.linspace(0, 20, 201)
    traj = em.solve_finite(m, times)
    np.testing.assert_allclose(traj.observables["excited"], np.cos(g * times) ** 2, atol=1e-8)


def test_finite_norm_and_amplitude_bound():
    traj = em.solve_finite(band(), np.linspace(0, 50, 101))
    np.testing.assert_allclose(traj.observables["norm"], 1.0, atol=1e-10)
    assert np.all(traj.observables["excited"] <= 1 + 1e-12)


def test_finite_time_reversal():
    m = band(n_modes=64)
    state = em.AmplitudeState.excited(m.n_modes)
    back = em.evolve(m, em.evolve(m, state, 7.3), -7.3)
    assert abs(back.alpha - 1) <= 1e-9
    assert np.abs(back.betas).max() <= 1e-9


def test_mode_cap():
    m = em.ExactModel(1.5, 1.0, 2.0, 1.0 / 5000, 0.001)
    with pytest.raises(SizeError):
        em.solve_finite(m, [0.0, 1.0])


def test_times_validation():
    with pytest.raises(ValidationError):
        em.solve_finite(band(), [0.5, 1.0])
    with pytest.raises(ValidationError):
        em.solve_finite(band(), [0.0, 1.0, 1.0])


def test_kernel_closed_form(rng):
    m = band()
    s = rng.uniform(-20, 20, size=10)
    w = np.linspace(m.omega_min, m.omega_max, 20001)
    for x in s:
        f = np.exp(-1j * w * x)
        quad = np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(w))
        # trapezoid error ~ (b-a) h^2 x^2 / 12 stays below 1e-9 here; compare at that level
        assert abs(em.kernel(m, x) - quad) <= 1e-8 * max(1, x**2)
        exact = (np.exp(-1j * m.omega_min * x) - np.exp(-1j * m.omega_max * x)) / (1j * x)
        assert abs(em.kernel(m, x) - exact) <= 1e-10
    assert em.kernel(m, 0.0) == pytest.approx(m.bandwidth)


def test_continuum_decoupled():
    m = em.ExactModel(1.5, 1.0, 2.0, 0.01, 0.0)
    grid, alpha = em.continuum_amplitude(m, 30.0, m.min_timescale / 20)
    np.testing.assert_allclose(np.abs(alpha), 1.0, atol=1e-10)
    # without memory the scheme is the Cayley map of -i*omega*h
    h = grid[1]
    cayley = (1 - 0.75j * h) / (1 + 0.75j * h)
    np.testing.assert_allclose(alpha, cayley ** np.arange(grid.size), atol=1e-10)
    np.testing.assert_allclose(alpha, np.exp(-1.5j * grid), atol=1e-2)


def test_continuum_step_limit():
    m = band()
    with pytest.raises(StepError):
        em.solve_continuum(m, [0.0, 1.0], m.min_timescale / 10)


@pytest.mark.parametrize("coupling", [0.05, 0.2, 0.5])
def test_finite_matches_continuum(coupling):
    m = band(coupling)
    times = np.linspace(0, 10 * m.correlation_time, 201)
    fin = em.solve_finite(m, times)
    con = em.solve_continuum(m, times, m.min_timescale / 20)
    assert np.abs(fin.sigma_z - con.sigma_z).max() <= 2e-2
    assert np.all(np.abs(con.sigma_z) <= 1 + 1e-12)


def test_continuum_second_order():
    m = band(0.5)
    h = m.min_timescale / 20
    ref = em.continuum_amplitude(m, 10.0, h / 8)[1]
    errors = []
    for step, stride in ((h, 8), (h / 2, 4)):
        alpha = em.continuum_amplitude(m, 10.0, step)[1]
        errors.append(np.abs(alpha - ref[::stride]).max())
    assert 3.0 <= errors[0] / errors[1] <= 5.0


def test_fixture_estimates_recorded():
    from erdim import fixtures

    for name in ("exact_low", "exact_high"):
        fx = fixtures.load(name)
        est = effective_dimension(em.derived_params(fixtures.exact_model(fx), fx["epsilon"]))
        assert est.d_er == pytest.approx(fx["estimate"]["d_er"], rel=1e-9)
        assert est.d_er_ceil == fx["estimate"]["d_er_ceil"]
    assert fixtures.load("exact_low")["estimate"]["d_er"] < fixtures.load("exact_high")["estimate"]["d_er"]
