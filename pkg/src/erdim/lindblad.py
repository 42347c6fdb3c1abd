"""GKSL (Lindblad) generators, semigroup propagation and partial traces.

Qubit convention: basis order ``(|0>, |1>)`` with ``|0>`` the ground state,
``sigma_plus = |1><0|`` and ``sigma_z = |1><1| - |0><0|`` so that
``tr[sigma_z rho] = 2 * p_excited - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .algebra import as_matrix, devectorize, is_hermitian, kron, matexp, vectorize
from .errors import ShapeError, ValidationError

SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=np.complex128)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[-1, 0], [0, 1]], dtype=np.complex128)
EXCITED = SIGMA_PLUS @ SIGMA_MINUS
GROUND = SIGMA_MINUS @ SIGMA_PLUS
ID2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class GkslGenerator:
    """Hamiltonian plus weighted jump operators ``(L_k, gamma_k)``."""

    hamiltonian: NDArray[np.complex128]
    jumps: tuple[tuple[NDArray[np.complex128], float], ...] = ()

    def __post_init__(self):
        h = as_matrix(self.hamiltonian, "hamiltonian")
        if h.shape[0] != h.shape[1]:
            raise ShapeError(f"hamiltonian must be square, got {h.shape}")
        scale = max(1.0, float(np.abs(h).max(initial=0.0)))
        if not is_hermitian(h, atol=1e-12 * scale):
            raise ValidationError("hamiltonian is not Hermitian within 1e-12")
        jumps = []
        for op, rate in self.jumps:
            op = as_matrix(op, "jump operator")
            if op.shape != h.shape:
                raise ShapeError(f"jump operator shape {op.shape} != {h.shape}")
            rate = float(rate)
            if not rate >= 0.0:
                raise ValidationError(f"jump rate must be >= 0, got {rate}")
            jumps.append((op, rate))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class MarkovParams:
    omega: float
    gamma_down: float
    gamma_up: float

    def __post_init__(self):
        _check_rates(gamma_down=self.gamma_down, gamma_up=self.gamma_up)


@dataclass(frozen=True)
class EmbeddingParams:
    """System qubit coupled to a two-level effective reservoir."""

    omega1: float
    omega2: float
    g_tilde: float
    gamma1_down: float
    gamma1_up: float
    gamma2_down: float
    gamma2_up: float

    NAMES = ("omega1", "omega2", "g_tilde", "gamma1_down", "gamma1_up", "gamma2_down", "gamma2_up")

    def __post_init__(self):
        _check_rates(
            gamma1_down=self.gamma1_down,
            gamma1_up=self.gamma1_up,
            gamma2_down=self.gamma2_down,
            gamma2_up=self.gamma2_up,
        )

    def as_vector(self) -> NDArray[np.float64]:
        return np.array([getattr(self, k) for k in self.NAMES], dtype=float)

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "EmbeddingParams":
        if len(x) != 7:
            raise ShapeError(f"embedding parameter vector must have length 7, got {len(x)}")
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class PseudomodeParams:
    """Qubit coupled to a damped bosonic mode truncated at ``cutoff`` Fock states."""

    omega0: float
    omega: float
    omega_rabi: float
    gamma_decay: float
    cutoff: int
    n0: float = 0.0

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ValidationError(f"cutoff must be an integer >= 1, got {self.cutoff}")
        _check_rates(gamma_decay=self.gamma_decay, n0=self.n0)


def _check_rates(**rates: float) -> None:
    for name, value in rates.items():
        if not float(value) >= 0.0:
            raise ValidationError(f"{name} must be >= 0, got {value}")


@dataclass
class Trajectory:
    """Time grid with named real observables and optionally the vectorized states.

    Stored states must have unit trace within ``trace_tol``; ``None`` disables
    the check (for approximate contractions that do not preserve the trace).
    """

    times: NDArray[np.float64]
    observables: dict[str, NDArray[np.float64]] = field(default_factory=dict)
    states: NDArray[np.complex128] | None = None
    trace_tol: float | None = field(default=1e-9, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1:
            raise ShapeError("times must be 1-D")
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("times must be strictly increasing")
        for name, series in self.observables.items():
            series = np.asarray(series, dtype=float)
            if series.shape != self.times.shape:
                raise ShapeError(f"observable {name!r} has shape {series.shape}")
            self.observables[name] = series
        if self.states is not None:
            self.states = np.asarray(self.states, dtype=np.complex128)
            if self.states.shape[0] != self.times.size:
                raise ShapeError("states and times are misaligned")
            d = int(round(np.sqrt(self.states.shape[1])))
            traces = self.states[:, :: d + 1].sum(axis=1)
            if self.trace_tol is not None and np.any(np.abs(traces - 1.0) > self.trace_tol):
                raise ValidationError("stored state with trace != 1")

    @property
    def sigma_z(self) -> NDArray[np.float64]:
        return self.observables["sigma_z"]

    def density_matrices(self) -> list[NDArray[np.complex128]]:
        if self.states is None:
            raise ValidationError("trajectory holds no states")
        return [devectorize(v) for v in self.states]


def build_superoperator(gen: GkslGenerator) -> NDArray[np.complex128]:
    """Matrix of ``rho -> -i[H, rho] + sum_k g_k (L rho L^+ - {L^+ L, rho}/2)``.

    Acts on row-major vectorized density matrices.
    """
    h = gen.hamiltonian
    ident = np.eye(gen.dim, dtype=np.complex128)
    sup = -1j * (kron(h, ident) - kron(ident, h.T))
    for op, rate in gen.jumps:
        if rate == 0.0:
            continue
        ldl = op.conj().T @ op
        sup += rate * (kron(op, op.conj()) - 0.5 * kron(ldl, ident) - 0.5 * kron(ident, ldl.T))
    return sup


def validate_density_matrix(rho: ArrayLike, atol: float = 1e-10) -> NDArray[np.complex128]:
    rho = as_matrix(rho, "rho")
    if rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"rho must be square, got {rho.shape}")
    if not is_hermitian(rho, atol=atol):
        raise ValidationError("rho is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValidationError(f"rho has trace {np.trace(rho).real:.12g}, expected 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -atol:
        raise ValidationError("rho is not positive semidefinite")
    return rho


def expectation(op: NDArray, state_vec: NDArray) -> float:
    """``tr[op rho]`` for a row-major vectorized ``rho``."""
    # tr[O rho] = sum_jk O_kj rho_jk
    return float(np.real(np.dot(op.T.reshape(-1), state_vec)))


def propagate(
    gen: GkslGenerator,
    rho0: ArrayLike,
    times: ArrayLike,
    observables: Mapping[str, ArrayLike] | None = None,
    keep_states: bool = True,
) -> Trajectory:
    """Evolve ``rho0`` under ``exp(L t)`` sampled at ``times``.

    One exponential is computed per distinct time gap and reused, so uniform
    grids cost a single ``matexp``.
    """
    rho0 = validate_density_matrix(rho0)
    if rho0.shape[0] != gen.dim:
        raise ShapeError(f"rho0 dim {rho0.shape[0]} != generator dim {gen.dim}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ShapeError("times must be a non-empty 1-D grid")
    if np.any(np.diff(times) <= 0):
        raise ValidationError("times must be strictly increasing")
    sup = build_superoperator(gen)
    observables = {k: as_matrix(v, k) for k, v in (observables or {}).items()}

    cache: dict[float, NDArray] = {}

    def step(dt: float) -> NDArray:
        key = round(dt, 12)
        if key not in cache:
            cache[key] = matexp(sup * dt)
        return cache[key]

    states = np.empty((times.size, gen.dim**2), dtype=np.complex128)
    vec = vectorize(rho0)
    prev = 0.0
    for k, t in enumerate(times):
        if t != prev:
            vec = step(t - prev) @ vec
        states[k] = vec
        prev = t
    obs = {name: np.array([expectation(op, v) for v in states]) for name, op in observables.items()}
    return Trajectory(times, obs, states if keep_states else None)


def gad_generator(p: MarkovParams) -> GkslGenerator:
    """Generalized amplitude damping: decay ``gamma_down`` and pumping ``gamma_up``."""
    return GkslGenerator(
        p.omega * EXCITED,
        ((SIGMA_MINUS, p.gamma_down), (SIGMA_PLUS, p.gamma_up)),
    )


def embedding2_generator(p: EmbeddingParams) -> GkslGenerator:
    """System qubit (first factor) exchanging excitations with a damped reservoir qubit."""
    h = (
        p.omega1 * kron(EXCITED, ID2)
        + p.omega2 * kron(ID2, EXCITED)
        + p.g_tilde * (kron(SIGMA_PLUS, SIGMA_MINUS) + kron(SIGMA_MINUS, SIGMA_PLUS))
    )
    jumps = (
        (kron(SIGMA_MINUS, ID2), p.gamma1_down),
        (kron(SIGMA_PLUS, ID2), p.gamma1_up),
        (kron(ID2, SIGMA_MINUS), p.gamma2_down),
        (kron(ID2, SIGMA_PLUS), p.gamma2_up),
    )
    return GkslGenerator(h, jumps)


def annihilation(cutoff: int) -> NDArray[np.complex128]:
    """Truncated bosonic ``a`` with ``a|k> = sqrt(k)|k-1>``."""
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(np.complex128)


def pseudomode_generator(p: PseudomodeParams) -> GkslGenerator:
    """Qubit (first factor) coupled via ``Omega0 sigma_x (a^+ + a)`` to a damped mode."""
    a = annihilation(p.cutoff)
    num = a.conj().T @ a
    idm = np.eye(p.cutoff, dtype=np.complex128)
    h = (
        p.omega0 * kron(EXCITED, idm)
        + p.omega * kron(ID2, num)
        + p.omega_rabi * kron(SIGMA_X, a + a.conj().T)
    )
    return GkslGenerator(h, ((kron(ID2, a), p.gamma_decay),))


def pseudomode_initial_state(cutoff: int) -> NDArray[np.complex128]:
    """Excited qubit times pseudomode vacuum."""
    vac = np.zeros((cutoff, cutoff), dtype=np.complex128)
    vac[0, 0] = 1.0
    return kron(EXCITED, vac)


def partial_trace(rho: ArrayLike, dims: tuple[int, int], keep: str = "A") -> NDArray[np.complex128]:
    """Reduce a bipartite ``dA*dB`` square matrix onto factor ``"A"`` or ``"B"``."""
    rho = as_matrix(rho, "rho")
    d_a, d_b = (int(d) for d in dims)
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise ShapeError(f"rho shape {rho.shape} does not match dims {dims}")
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ikjk->ij", t)
    if keep == "B":
        return np.einsum("kikj->ij", t)
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")
