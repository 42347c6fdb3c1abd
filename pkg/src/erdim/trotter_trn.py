"""Trotterized system-reservoir dynamics and the timeline reservoir network (TRN).

Vectorized states of ``S + R`` are kept in the factor order
``S (x) S' (x) R (x) R'`` (ket and bra copies of each subsystem side by side),
so every layer factorizes as ``system part (x) reservoir part``. One Trotter
step applies the first-order interaction layer and then the free layer.

Contracting all reservoir indices of the Trotter network leaves a
matrix-product object, the TRN, whose sites are time steps and whose
physical index ``i = 0..2n`` selects a term of the interaction layer. Its
first "site" carries the index ``l`` of the correlated initial state
``rho(0) = sum_l sigma_S^l (x) sigma_R^l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .algebra import as_matrix, is_hermitian, kron, matexp, svd
from .errors import DomainError, RangeError, ShapeError, SizeError, StepError, ValidationError
from .lindblad import Trajectory

MAX_RESERVOIR_DIM = 8
MAX_STEPS = 64
MAX_TROTTER_STEP = 0.1
ALPHA_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))

Pair = tuple[NDArray[np.complex128], NDArray[np.complex128]]


@dataclass(frozen=True)
class CoupledModel:
    """``H = H_S + H_R + gamma * sum_i A_i (x) B_i`` with a correlated initial state."""

    hs: NDArray[np.complex128]
    hr: NDArray[np.complex128]
    couplings: tuple[Pair, ...]
    gamma: float
    initial: tuple[Pair, ...]

    def __post_init__(self):
        hs = as_matrix(self.hs, "hs")
        hr = as_matrix(self.hr, "hr")
        for name, h in (("hs", hs), ("hr", hr)):
            if h.shape[0] != h.shape[1] or not is_hermitian(h, 1e-12 * max(1.0, np.abs(h).max())):
                raise ValidationError(f"{name} must be a square Hermitian matrix")
        ds, dr = hs.shape[0], hr.shape[0]
        if not self.couplings:
            raise ValidationError("need at least one coupling term (n >= 1)")
        couplings = tuple((as_matrix(a, "A_i"), as_matrix(b, "B_i")) for a, b in self.couplings)
        for a, b in couplings:
            if a.shape != (ds, ds) or b.shape != (dr, dr):
                raise ShapeError("coupling operators do not match subsystem dimensions")
        if not self.initial:
            raise ValidationError("initial state decomposition is empty")
        initial = tuple((as_matrix(s, "sigma_S"), as_matrix(r, "sigma_R")) for s, r in self.initial)
        for s, r in initial:
            if s.shape != (ds, ds) or r.shape != (dr, dr):
                raise ShapeError("initial-state factors do not match subsystem dimensions")
        if not float(self.gamma) >= 0:
            raise ValidationError("gamma must be >= 0")
        object.__setattr__(self, "hs", hs)
        object.__setattr__(self, "hr", hr)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "gamma", float(self.gamma))
        hint = self.interaction_hamiltonian()
        if not is_hermitian(hint, 1e-10 * max(1.0, np.abs(hint).max())):
            raise ValidationError("interaction Hamiltonian is not Hermitian")
        rho = self.initial_state()
        if not is_hermitian(rho, 1e-10) or abs(np.trace(rho) - 1) > 1e-10:
            raise ValidationError("initial state must be Hermitian with unit trace")
        if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-10:
            raise ValidationError("initial state is not positive semidefinite")

    @property
    def ds(self) -> int:
        return self.hs.shape[0]

    @property
    def dr(self) -> int:
        return self.hr.shape[0]

    @property
    def n(self) -> int:
        return len(self.couplings)

    def interaction_hamiltonian(self) -> NDArray[np.complex128]:
        return self.gamma * sum(kron(a, b) for a, b in self.couplings)

    def total_hamiltonian(self) -> NDArray[np.complex128]:
        return (
            kron(self.hs, np.eye(self.dr))
            + kron(np.eye(self.ds), self.hr)
            + self.interaction_hamiltonian()
        )

    def initial_state(self) -> NDArray[np.complex128]:
        return sum(kron(s, r) for s, r in self.initial)

    def initial_vector(self) -> NDArray[np.complex128]:
        """``rho(0)`` in the split ``S S' R R'`` ordering."""
        return sum(np.kron(s.reshape(-1), r.reshape(-1)) for s, r in self.initial)


@dataclass(frozen=True)
class TrotterLayers:
    """Free-evolution factors and the ``2n+1`` interaction terms for one step ``tau``."""

    tau: float
    phi0_sys: NDArray[np.complex128]
    phi0_res: NDArray[np.complex128]
    a_ops: tuple[NDArray[np.complex128], ...]
    b_ops: tuple[NDArray[np.complex128], ...]

    @property
    def physical_dim(self) -> int:
        return len(self.a_ops)

    def interaction(self) -> NDArray[np.complex128]:
        return sum(kron(a, b) for a, b in zip(self.a_ops, self.b_ops))

    def free(self) -> NDArray[np.complex128]:
        return kron(self.phi0_sys, self.phi0_res)

    def step(self) -> NDArray[np.complex128]:
        return self.free() @ self.interaction()

    def system_terms(self) -> NDArray[np.complex128]:
        """``phi0_sys @ A_i`` stacked along the first axis."""
        return np.stack([self.phi0_sys @ a for a in self.a_ops])

    def reservoir_terms(self) -> NDArray[np.complex128]:
        return np.stack([self.phi0_res @ b for b in self.b_ops])


def superpropagator(h: NDArray, t: float) -> NDArray[np.complex128]:
    """``exp(-i t H) (x) exp(i t H^T)`` acting on row-major vectorized operators."""
    return kron(matexp(-1j * t * h), matexp(1j * t * h.T))


def build_trotter_layers(m: CoupledModel, tau: float) -> TrotterLayers:
    """First-order interaction terms and free propagators for step ``tau``.

    Raises:
        StepError: if ``gamma * tau`` exceeds 0.1.
    """
    if not tau > 0:
        raise StepError("tau must be positive")
    if m.gamma * tau > MAX_TROTTER_STEP:
        raise StepError(f"gamma*tau = {m.gamma * tau:.4g} exceeds {MAX_TROTTER_STEP}")
    root = np.sqrt(m.gamma * tau)
    id_s = np.eye(m.ds, dtype=np.complex128)
    id_r = np.eye(m.dr, dtype=np.complex128)
    a_ops = [kron(id_s, id_s)]
    b_ops = [kron(id_r, id_r)]
    for a, b in m.couplings:
        a_ops.append(root * kron(a, id_s))
        b_ops.append(-1j * root * kron(b, id_r))
    for a, b in m.couplings:
        a_ops.append(root * kron(id_s, a.T))
        b_ops.append(1j * root * kron(id_r, b.T))
    return TrotterLayers(
        tau=float(tau),
        phi0_sys=superpropagator(m.hs, tau),
        phi0_res=superpropagator(m.hr, tau),
        a_ops=tuple(a_ops),
        b_ops=tuple(b_ops),
    )


def trotter_propagate(
    layers: TrotterLayers, rho0_vec: ArrayLike, steps: int, record: bool = False
) -> NDArray[np.complex128]:
    """Apply ``steps`` Trotter steps to a split-ordered state vector.

    With ``record=True`` all ``steps + 1`` intermediate vectors are returned.
    """
    if steps < 0:
        raise ValidationError("steps must be >= 0")
    vec = np.asarray(rho0_vec, dtype=np.complex128).reshape(-1)
    step = layers.step()
    if step.shape[1] != vec.size:
        raise ShapeError(f"state of size {vec.size} does not match layers of size {step.shape[1]}")
    out = [vec]
    for _ in range(steps):
        vec = step @ vec
        out.append(vec)
    return np.array(out) if record else vec


def reduce_to_system(vec: ArrayLike, ds: int, dr: int) -> NDArray[np.complex128]:
    """``tr_R`` of a split-ordered vector, returned as a ``ds x ds`` matrix."""
    t = np.asarray(vec, dtype=np.complex128).reshape(ds, ds, dr, dr)
    return np.einsum("abkk->ab", t)


def split_to_matrix(vec: ArrayLike, ds: int, dr: int) -> NDArray[np.complex128]:
    """Split-ordered vector back to the ``(S R) x (S R)`` density matrix."""
    t = np.asarray(vec, dtype=np.complex128).reshape(ds, ds, dr, dr)
    return t.transpose(0, 2, 1, 3).reshape(ds * dr, ds * dr)


# --------------------------------------------------------------------- TRN


@dataclass(frozen=True)
class TimelineMps:
    """Matrix-product form of the TRN.

    ``left_boundary[l, a]``, ``sites[k][a, i, b]`` and ``right_boundary[b]``
    contract to the raw TRN; dividing by ``normalization`` gives the unit
    vector ``psi``.
    """

    left_boundary: NDArray[np.complex128]
    sites: tuple[NDArray[np.complex128], ...]
    right_boundary: NDArray[np.complex128]
    normalization: float

    def __post_init__(self):
        bond = self.left_boundary.shape[1]
        phys = None
        for k, w in enumerate(self.sites):
            if w.ndim != 3 or w.shape[0] != bond:
                raise ShapeError(f"site {k + 1} has shape {w.shape}, expected left bond {bond}")
            if phys is not None and w.shape[1] != phys:
                raise ShapeError("physical dimension differs between sites")
            phys, bond = w.shape[1], w.shape[2]
        if self.right_boundary.shape != (bond,):
            raise ShapeError("right boundary does not match the last bond")

    @property
    def n_steps(self) -> int:
        return len(self.sites)

    @property
    def physical_dim(self) -> int:
        return self.sites[0].shape[1]

    @property
    def bond_dims(self) -> list[int]:
        """Bond dimension after the boundary site and after each time step."""
        return [self.left_boundary.shape[1]] + [w.shape[2] for w in self.sites]

    def tensors(self) -> list[NDArray[np.complex128]]:
        """Open-boundary MPS tensors ``(left, phys, right)`` of the raw TRN."""
        out = [self.left_boundary[None, :, :]] + list(self.sites)
        out[-1] = np.einsum("aib,b->ai", out[-1], self.right_boundary)[:, :, None]
        return out

    def to_dense(self, normalized: bool = True) -> NDArray[np.complex128]:
        """Full ``psi[l, i_1, ..., i_N]`` (only for small instances)."""
        size = self.left_boundary.shape[0] * self.physical_dim**self.n_steps
        if size > 1 << 24:
            raise SizeError(f"dense TRN would have {size} entries")
        psi = self.left_boundary
        for w in self.sites:
            psi = np.tensordot(psi, w, axes=([-1], [0]))
        psi = np.tensordot(psi, self.right_boundary, axes=([-1], [0]))
        return psi / self.normalization if normalized else psi


def _norm_squared(tensors: Sequence[NDArray]) -> float:
    env = np.ones((1, 1), dtype=np.complex128)
    for t in tensors:
        env = np.einsum("ac,aib,cid->bd", env, t, t.conj())
    return float(env[0, 0].real)


def build_trn(m: CoupledModel, tau: float, steps: int) -> TimelineMps:
    """TRN of ``steps`` Trotter steps; untruncated bond dimension ``d_R**2``.

    Raises:
        SizeError: beyond ``d_R <= 8`` or ``steps <= 64``.
    """
    if m.dr > MAX_RESERVOIR_DIM or steps > MAX_STEPS:
        raise SizeError(f"TRN budget exceeded (d_R={m.dr} <= {MAX_RESERVOIR_DIM}, steps={steps} <= {MAX_STEPS})")
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    layers = build_trotter_layers(m, tau)
    left = np.array([r.reshape(-1) for _, r in m.initial])
    # site[a, i, b] = (phi0_R B_i)[b, a]
    site = layers.reservoir_terms().transpose(2, 0, 1).copy()
    right = np.eye(m.dr, dtype=np.complex128).reshape(-1)
    raw = TimelineMps(left, tuple(site for _ in range(steps)), right, 1.0)
    norm = np.sqrt(_norm_squared(raw.tensors()))
    return TimelineMps(left, raw.sites, right, float(norm))


def _unit_tensors(trn: TimelineMps) -> list[NDArray[np.complex128]]:
    ts = trn.tensors()
    ts[0] = ts[0] / trn.normalization
    return ts


def _left_canonical(tensors: list[NDArray]) -> list[NDArray]:
    """QR sweep left to right; the last tensor carries the norm."""
    ts = [t.copy() for t in tensors]
    for k in range(len(ts) - 1):
        a, p, b = ts[k].shape
        q, r = np.linalg.qr(ts[k].reshape(a * p, b))
        ts[k] = q.reshape(a, p, q.shape[1])
        ts[k + 1] = np.tensordot(r, ts[k + 1], axes=([1], [0]))
    return ts


def _right_sweep(tensors: list[NDArray], rank: int | None = None):
    """SVD sweep right to left over left-canonical tensors.

    Returns the new (right-canonical) tensors, the Schmidt values found at
    every bond ``k = N-1 .. 0`` (bond ``k`` sits right of tensor ``k``) and
    the discarded weight at each bond.
    """
    ts = list(tensors)
    spectra: dict[int, NDArray] = {}
    discarded: dict[int, float] = {}
    for k in range(len(ts) - 1, 0, -1):
        a, p, b = ts[k].shape
        u, s, vh = svd(ts[k].reshape(a, p * b))
        spectra[k - 1] = s
        keep = s.size if rank is None else min(rank, s.size)
        discarded[k - 1] = float(np.sum(s[keep:] ** 2))
        u, s, vh = u[:, :keep], s[:keep], vh[:keep]
        ts[k] = vh.reshape(keep, p, b)
        ts[k - 1] = np.tensordot(ts[k - 1], u * s, axes=([2], [0]))
    return ts, spectra, discarded


SCHMIDT_RESOLUTION = 1e-14


def _spectrum(s: NDArray[np.float64]) -> NDArray[np.float64]:
    """Normalized squared Schmidt values; values below double-precision resolution are dropped.

    Rounding noise of order ``1e-16 * s_max`` would otherwise dominate
    small-``alpha`` Renyi entropies.
    """
    s = s[s > SCHMIDT_RESOLUTION * s[0]] if s.size and s[0] > 0 else s[:1]
    lam = s**2
    return lam / lam.sum()


def bond_spectra(trn: TimelineMps) -> list[NDArray[np.float64]]:
    """Schmidt spectra (squared, normalized) of the unit TRN at every bond.

    Entry ``m`` is the cut after time step ``m`` (``m = 0`` separates the
    initial-state index ``l`` from the time steps).
    """
    _, spectra, _ = _right_sweep(_left_canonical(_unit_tensors(trn)))
    return [_spectrum(spectra[m]) for m in range(trn.n_steps)]


def schmidt_cut(trn: TimelineMps, m: int) -> NDArray[np.float64]:
    """Eigenvalues of the reduced matrix ``M`` for the cut between steps ``m`` and ``m+1``.

    Raises:
        RangeError: unless ``0 < m < N``.
    """
    if not 0 < m < trn.n_steps:
        raise RangeError(f"cut position {m} outside (0, {trn.n_steps})")
    ts = _unit_tensors(trn)
    left = _left_canonical(ts[: m + 1])
    # bring the right block into right-canonical form, carrying the remainder left
    right = [t.copy() for t in ts[m + 1 :]]
    carry = None
    for k in range(len(right) - 1, -1, -1):
        t = right[k] if carry is None else np.tensordot(right[k], carry, axes=([2], [0]))
        a, p, b = t.shape
        q, r = np.linalg.qr(t.reshape(a, p * b).conj().T)
        right[k] = q.conj().T.reshape(q.shape[1], p, b)
        carry = r.conj().T
    bond = np.tensordot(left[-1], carry, axes=([2], [0]))
    a, p, b = bond.shape
    return _spectrum(svd(bond.reshape(a * p, b))[1])


def renyi_entropy(spectrum: ArrayLike, alpha: float) -> float:
    """``ln(sum_k lam_k**alpha) / (1 - alpha)`` in nats; zero weights are skipped."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    lam = np.asarray(spectrum, dtype=float)
    lam = lam[lam > 0]
    return float(np.log(np.sum(lam**alpha)) / (1.0 - alpha))


def column_weight_bound(matrix: ArrayLike, alpha: float) -> float:
    """Renyi bound from any decomposition ``M = sum_q v_q v_q^+``.

    ``matrix`` holds the vectors ``v_q`` as columns; the result is
    ``ln(sum_q |v_q|^(2 alpha)) / (1 - alpha)`` for unit total weight.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly inside (0, 1), got {alpha}")
    w = np.sum(np.abs(np.asarray(matrix)) ** 2, axis=0)
    w = w / w.sum()
    w = w[w > 0]
    return float(np.log(np.sum(w**alpha)) / (1.0 - alpha))


def truncation_bound(entropy: float, rank: int, alpha: float) -> float:
    """Right-hand side of the rank-``r`` truncation inequality for ``ln eps``."""
    return (1.0 - alpha) / alpha * (entropy - np.log(rank / (1.0 - alpha)))


def truncate(trn: TimelineMps, r: int) -> tuple[TimelineMps, float]:
    """Compress every bond to at most ``r`` by a canonical SVD sweep.

    Returns the truncated network (same ``normalization``; it contracts to
    ``normalization * psi_r``) and the Frobenius distance ``|psi - psi_r|``
    between the unit TRN and its truncation, accumulated from the
    discarded Schmidt weights of the sweep.
    """
    if r < 1:
        raise ValidationError("rank must be >= 1")
    ts, _, discarded = _right_sweep(_left_canonical(_unit_tensors(trn)), rank=r)
    eps = float(np.sqrt(sum(discarded.values())))
    left = ts[0][0] * trn.normalization
    sites = tuple(ts[1:])
    return TimelineMps(left, sites, np.ones(1, dtype=np.complex128), trn.normalization), eps


def contract_with_system(
    trn: TimelineMps,
    layers: TrotterLayers,
    sys_initial: Sequence[ArrayLike],
    trace_tol: float | None = 1e-9,
) -> Trajectory:
    """Reduced system states at ``t = k * tau`` by left-to-right contraction.

    ``trace_tol=None`` skips the unit-trace check (useful after truncation).
    """
    sys_initial = [as_matrix(s, "sigma_S") for s in sys_initial]
    if len(sys_initial) != trn.left_boundary.shape[0]:
        raise ShapeError("number of system factors does not match the TRN boundary")
    if trn.physical_dim != layers.physical_dim:
        raise ShapeError("TRN physical dimension does not match the Trotter layers")
    sysops = layers.system_terms()
    ds2 = sysops.shape[1]
    start = np.array([s.reshape(-1) for s in sys_initial])
    if start.shape[1] != ds2:
        raise ShapeError("system factor size does not match the Trotter layers")
    # env[a, s]: open reservoir bond a, vectorized system state s
    env = np.einsum("la,ls->as", trn.left_boundary, start)
    slices = [env]
    for w in trn.sites:
        env = np.einsum("aib,its,as->bt", w, sysops, env)
        slices.append(env)
    closer = trn.right_boundary
    if all(d == closer.size for d in trn.bond_dims):
        # untruncated: every bond is a vectorized reservoir operator
        states = np.array([closer @ e for e in slices])
        times = layers.tau * np.arange(trn.n_steps + 1)
    else:
        # compressed bonds have no reservoir meaning; only the final slice closes
        states = (closer @ slices[-1])[None, :]
        times = np.array([layers.tau * trn.n_steps])
    return Trajectory(times, {}, states, trace_tol=trace_tol)


# ------------------------------------------------------- random stand-ins


def random_hermitian(rng: np.random.Generator, d: int) -> NDArray[np.complex128]:
    """Hermitian matrix with unit spectral norm."""
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (x + x.conj().T)
    return h / np.linalg.norm(h, 2)


def random_density_matrix(rng: np.random.Generator, d: int, rank: int | None = None) -> NDArray[np.complex128]:
    k = d if rank is None else rank
    x = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def operator_schmidt(rho: NDArray, ds: int, dr: int, tol: float = 1e-13) -> tuple[Pair, ...]:
    """Split ``rho`` on ``S R`` into ``sum_l sigma_S^l (x) sigma_R^l``."""
    realigned = rho.reshape(ds, dr, ds, dr).transpose(0, 2, 1, 3).reshape(ds * ds, dr * dr)
    u, s, vh = svd(realigned)
    keep = max(1, int(np.sum(s > tol * s[0])))
    return tuple(
        ((s[l] * u[:, l]).reshape(ds, ds), vh[l].reshape(dr, dr)) for l in range(keep)
    )


def random_model(
    rng: np.random.Generator,
    dr: int,
    n: int = 1,
    gamma: float = 1.0,
    ds: int = 2,
    correlated: bool = True,
) -> CoupledModel:
    """Random Hermitian ``H_S``, ``H_R``, couplings and initial state (all unit norm)."""
    couplings = tuple((random_hermitian(rng, ds), random_hermitian(rng, dr)) for _ in range(n))
    if correlated:
        initial = operator_schmidt(random_density_matrix(rng, ds * dr), ds, dr)
    else:
        initial = ((random_density_matrix(rng, ds), random_density_matrix(rng, dr)),)
    return CoupledModel(random_hermitian(rng, ds), random_hermitian(rng, dr), couplings, gamma, initial)
