"""Qubit decaying into a flat band of bosonic modes, solved exactly.

The single-excitation sector is spanned by ``|1, vac>`` and ``|0, 1_m>``,
``m = 1..N`` with mode frequencies ``omega_min + m * delta_omega``. The finite
bath is diagonalized directly; the continuum limit is integrated as a Volterra
equation for the excited amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import _backend
from .complexity import PhysicalParams
from .errors import ShapeError, SizeError, StepError, ValidationError
from .lindblad import Trajectory

MAX_MODES = 4096


@dataclass(frozen=True)
class ExactModel:
    omega: float
    omega_min: float
    omega_max: float
    delta_omega: float
    g: float

    def __post_init__(self):
        if not 0.0 < self.omega_min < self.omega_max:
            raise ValidationError("need 0 < omega_min < omega_max")
        if not self.delta_omega > 0.0:
            raise ValidationError("delta_omega must be positive")
        ratio = self.bandwidth / self.delta_omega
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
            raise ValidationError(f"(omega_max - omega_min)/delta_omega = {ratio!r} is not a positive integer")

    @property
    def bandwidth(self) -> float:
        return self.omega_max - self.omega_min

    @property
    def n_modes(self) -> int:
        return int(round(self.bandwidth / self.delta_omega))

    @property
    def mode_frequencies(self) -> NDArray[np.float64]:
        return self.omega_min + self.delta_omega * np.arange(1, self.n_modes + 1)

    @property
    def memory_coupling(self) -> float:
        """``g**2 / delta_omega``, the prefactor of the continuum memory integral."""
        return self.g**2 / self.delta_omega

    @property
    def correlation_time(self) -> float:
        return 1.0 / self.bandwidth

    @property
    def min_timescale(self) -> float:
        return 1.0 / self.omega_max

    @classmethod
    def from_continuum(cls, omega, omega_min, omega_max, coupling, n_modes) -> "ExactModel":
        """Discretize a band with fixed memory coupling ``g**2/delta_omega`` into ``n_modes``."""
        dw = (omega_max - omega_min) / n_modes
        return cls(omega, omega_min, omega_max, dw, math.sqrt(coupling * dw))


@dataclass(frozen=True)
class AmplitudeState:
    alpha: complex
    betas: NDArray[np.complex128]

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + float(np.sum(np.abs(self.betas) ** 2))
        if abs(norm - 1.0) > 1e-8:
            raise ValidationError(f"single-excitation norm {norm:.12g} != 1")

    @classmethod
    def excited(cls, n_modes: int) -> "AmplitudeState":
        return cls(1.0 + 0j, np.zeros(n_modes, dtype=np.complex128))

    def as_vector(self) -> NDArray[np.complex128]:
        return np.concatenate([[self.alpha], self.betas]).astype(np.complex128)

    @property
    def sigma_z(self) -> float:
        return 2.0 * abs(self.alpha) ** 2 - 1.0


def derived_params(m: ExactModel, epsilon: float) -> PhysicalParams:
    """Map the band model onto ``(n, gamma, T, tau)``."""
    return PhysicalParams(
        n=2,
        gamma=m.g * m.bandwidth / m.delta_omega,
        big_t=m.correlation_time,
        tau=m.min_timescale,
        epsilon=epsilon,
    )


def single_excitation_hamiltonian(m: ExactModel) -> NDArray[np.float64]:
    """Arrowhead matrix: ``Omega`` and mode frequencies on the diagonal, ``g`` borders."""
    n = m.n_modes
    if n > MAX_MODES:
        raise SizeError(f"{n} modes exceeds the cap of {MAX_MODES}")
    h = np.diag(np.concatenate([[m.omega], m.mode_frequencies]))
    h[0, 1:] = m.g
    h[1:, 0] = m.g
    return h


class _Eigensystem:
    def __init__(self, m: ExactModel):
        self.energies, self.vectors = np.linalg.eigh(single_excitation_hamiltonian(m))

    def evolve(self, vec: NDArray, t: float | NDArray) -> NDArray:
        coeffs = self.vectors.conj().T @ vec
        phases = np.exp(-1j * np.multiply.outer(np.atleast_1d(t), self.energies))
        return (phases * coeffs) @ self.vectors.T


def evolve(m: ExactModel, state: AmplitudeState, t: float) -> AmplitudeState:
    """Exact propagation by ``t`` (may be negative)."""
    vec = _Eigensystem(m).evolve(state.as_vector(), t)[0]
    return AmplitudeState(complex(vec[0]), vec[1:])


def solve_finite(m: ExactModel, times: ArrayLike) -> Trajectory:
    """``tr[sigma_z rho(t)]`` for the finite bath from ``|1, vac>``.

    Observables: ``sigma_z``, ``excited`` (``|alpha|^2``) and ``norm``.
    """
    times = _check_times(times)
    eig = _Eigensystem(m)
    start = AmplitudeState.excited(m.n_modes).as_vector()
    amps = eig.evolve(start, times)
    pop = np.abs(amps[:, 0]) ** 2
    norm = np.sum(np.abs(amps) ** 2, axis=1)
    return Trajectory(times, {"sigma_z": 2 * pop - 1, "excited": pop, "norm": norm})


def kernel(m: ExactModel, s: ArrayLike) -> NDArray[np.complex128]:
    """``G(s) = int_{omega_min}^{omega_max} exp(-i w s) dw``; ``G(0)`` is the bandwidth."""
    s = np.asarray(s, dtype=float)
    centre = 0.5 * (m.omega_min + m.omega_max)
    # (e^{-i wmin s} - e^{-i wmax s})/(i s) written without cancellation near s = 0
    return m.bandwidth * np.sinc(m.bandwidth * s / (2 * np.pi)) * np.exp(-1j * centre * s)


def continuum_amplitude(
    m: ExactModel, t_end: float, step: float, backend=None
) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """Excited amplitude on a uniform grid ``0, h, ..., t_end`` with ``h <= step``."""
    if step > m.min_timescale / 20 * (1 + 1e-12):
        raise StepError(f"step {step} exceeds tau/20 = {m.min_timescale / 20}")
    if not step > 0:
        raise StepError("step must be positive")
    n_steps = max(1, int(math.ceil(t_end / step - 1e-9)))
    h = t_end / n_steps
    grid = h * np.arange(n_steps + 1)
    kern = backend or _backend.kernels
    alpha = kern.volterra_trapezoid(kernel(m, grid), m.omega, m.memory_coupling, h, n_steps)
    return grid, alpha


def solve_continuum(m: ExactModel, times: ArrayLike, step: float, backend=None) -> Trajectory:
    """Continuum-limit ``tr[sigma_z rho(t)]`` via the implicit trapezoidal Volterra solver.

    Requested times off the internal grid are linearly interpolated.
    """
    times = _check_times(times)
    if times[-1] == 0.0:
        return Trajectory(times, {"sigma_z": np.ones(1), "excited": np.ones(1)})
    grid, alpha = continuum_amplitude(m, times[-1], step, backend=backend)
    pop = np.abs(alpha) ** 2
    pop_t = np.interp(times, grid, pop)
    return Trajectory(times, {"sigma_z": 2 * pop_t - 1, "excited": pop_t})


def _check_times(times: ArrayLike) -> NDArray[np.float64]:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ShapeError("times must be a non-empty 1-D array")
    if times[0] != 0.0:
        raise ValidationError("times must start at 0")
    if np.any(np.diff(times) <= 0):
        raise ValidationError("times must be strictly increasing")
    return times
