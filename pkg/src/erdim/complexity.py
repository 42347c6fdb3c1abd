"""Closed-form simulation-complexity estimates.

Given the coupling strength ``gamma``, the number ``n`` of coupled system
degrees of freedom, the reservoir correlation time ``T`` and the minimal
timescale ``tau``, these functions bound the Renyi entropy of the timeline
reservoir network, derive the sufficient matrix-product rank for accuracy
``epsilon`` and the matching effective-reservoir dimension ``d_er``
(``r_suff == d_er**2``).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, NumericalError, ValidationError

ALPHA_MIN = 1e-4
ALPHA_MAX = 1.0 - 1e-4
BRACKET_STEP = 1e-3
CEIL_TOL = 1e-9
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PhysicalParams:
    """Reduced parameter set ``(n, gamma, T, tau)`` plus target accuracy."""

    n: float
    gamma: float
    big_t: float
    tau: float
    epsilon: float

    def __post_init__(self):
        for name in ("n", "gamma", "big_t", "tau", "epsilon"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
        if self.n < 0 or self.big_t < 0:
            raise ValidationError("n and T must be non-negative")
        if self.gamma <= 0 or self.tau <= 0:
            raise ValidationError("gamma and tau must be positive")
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.gamma * self.tau >= 1.0:
            raise ValidationError(f"gamma*tau = {self.gamma * self.tau:.6g} must be < 1")

    @classmethod
    def from_dimensionless(
        cls, n: float, gamma_tau: float, n_gamma_t: float, epsilon: float, tau: float = 1.0
    ) -> "PhysicalParams":
        """Build from the two combinations ``gamma*tau`` and ``n*gamma*T``."""
        gamma = gamma_tau / tau
        big_t = n_gamma_t / (n * gamma) if n > 0 else 0.0
        return cls(n=n, gamma=gamma, big_t=big_t, tau=tau, epsilon=epsilon)

    @property
    def gamma_tau(self) -> float:
        return self.gamma * self.tau

    @property
    def n_gamma_t(self) -> float:
        return self.n * self.gamma * self.big_t


@dataclass(frozen=True)
class ComplexityEstimate:
    d_er: float
    d_er_ceil: int
    qubits: int
    r_suff: float
    alpha_star: float
    log_d_er: float


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly inside (0, 1), got {alpha}")


def renyi_bound(p: PhysicalParams, alpha: float, mode: str = "asymptotic") -> float:
    """Upper bound (nats) on the Renyi-``alpha`` entropy of the reduced TRN matrix.

    ``mode="exact"`` evaluates the finite-``T/tau`` product form,
    ``mode="asymptotic"`` its leading small-``gamma*tau`` expression.
    """
    _check_alpha(alpha)
    x = p.gamma_tau
    if mode == "exact":
        steps = p.big_t / p.tau
        return steps * (math.log1p(2 * p.n * x**alpha) - alpha * math.log1p(2 * p.n * x)) / (1 - alpha)
    if mode == "asymptotic":
        return 2 * p.n * p.gamma * p.big_t * (x ** (alpha - 1) - alpha) / (1 - alpha)
    raise ValidationError(f"mode must be 'exact' or 'asymptotic', got {mode!r}")


def log_rank_objective(p: PhysicalParams, alpha: ArrayLike, mode: str = "asymptotic") -> NDArray:
    """``ln[(1-a) eps^(-a/(1-a)) exp(S_a)]``, vectorized over ``alpha``."""
    a = np.asarray(alpha, dtype=float)
    x = p.gamma_tau
    if mode == "asymptotic":
        s = 2 * p.n * p.gamma * p.big_t * (x ** (a - 1) - a) / (1 - a)
    elif mode == "exact":
        steps = p.big_t / p.tau
        s = steps * (np.log1p(2 * p.n * x**a) - a * np.log1p(2 * p.n * x)) / (1 - a)
    else:
        raise ValidationError(f"mode must be 'exact' or 'asymptotic', got {mode!r}")
    return np.log1p(-a) - a / (1 - a) * math.log(p.epsilon) + s


def _minimize_log_rank(p: PhysicalParams, mode: str) -> tuple[float, float]:
    """Return ``(alpha*, ln r_suff)``: grid bracket then golden-section refinement."""
    grid = np.arange(ALPHA_MIN, ALPHA_MAX + 0.5 * BRACKET_STEP, BRACKET_STEP)
    grid[-1] = min(grid[-1], ALPHA_MAX)
    with np.errstate(over="ignore", invalid="ignore"):
        values = log_rank_objective(p, grid, mode)
    finite = np.isfinite(values)
    if not finite.any():
        raise NumericalError(f"rank objective non-finite over the whole alpha grid for {p}")
    values = np.where(finite, values, np.inf)
    i = int(np.argmin(values))

    def f(a: float) -> float:
        return float(log_rank_objective(p, a, mode))

    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > 1e-12:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    candidates = [(values[i], grid[i]), (fc, c), (fd, d)]
    best_val, best_alpha = min(candidates)
    if i == 0:
        # infimum may sit on the open end alpha -> 0+
        if mode == "asymptotic":
            limit = 2 * p.n * p.big_t / p.tau
        else:
            limit = p.big_t / p.tau * math.log1p(2 * p.n)
        if limit <= best_val:
            return ALPHA_MIN, limit
    if not math.isfinite(best_val):
        raise NumericalError(f"rank objective non-finite at alpha={best_alpha} for {p}")
    return float(best_alpha), float(best_val)


def sufficient_rank(p: PhysicalParams, mode: str = "asymptotic") -> float:
    """Sufficient matrix-product rank for accuracy ``p.epsilon``."""
    return math.exp(_minimize_log_rank(p, mode)[1])


def _ceil(x: float) -> int:
    return max(1, math.ceil(x - CEIL_TOL * max(1.0, x)))


def effective_dimension(p: PhysicalParams, mode: str = "asymptotic") -> ComplexityEstimate:
    """Minimal sufficient effective-reservoir dimension and derived integer counts."""
    alpha, log_r = _minimize_log_rank(p, mode)
    log_d = 0.5 * log_r
    if log_d > 700:
        raise NumericalError(f"d_er = exp({log_d:.1f}) overflows for {p}")
    d_er = math.exp(log_d)
    d_ceil = _ceil(d_er)
    qubits = _ceil(math.log2(d_ceil)) if d_ceil > 1 else 0
    return ComplexityEstimate(
        d_er=d_er,
        d_er_ceil=d_ceil,
        qubits=qubits,
        r_suff=math.exp(log_r),
        alpha_star=alpha,
        log_d_er=log_d,
    )


@dataclass(frozen=True)
class HeatmapGrid:
    """``cells[i, j] = log2 d_er`` at ``gt_axis[i]`` (rows) and ``ngt_axis[j]`` (columns)."""

    ngt_axis: NDArray[np.float64]
    gt_axis: NDArray[np.float64]
    cells: NDArray[np.float64]
    qubits: NDArray[np.int64]
    epsilon: float


def pseudomode_params(p, epsilon: float) -> PhysicalParams:
    """Complexity parameters of a damped pseudomode (``lindblad.PseudomodeParams``).

    ``n = 1``, ``T = 1/Gamma``, ``tau = 1/omega``, ``gamma = Omega0 sqrt(n0 + 1)``.
    """
    return PhysicalParams(
        n=1.0,
        gamma=p.omega_rabi * math.sqrt(p.n0 + 1.0),
        big_t=1.0 / p.gamma_decay,
        tau=1.0 / p.omega,
        epsilon=epsilon,
    )


def heatmap_params(n_gamma_t: float, gamma_tau: float, epsilon: float) -> PhysicalParams:
    return PhysicalParams.from_dimensionless(1.0, gamma_tau, n_gamma_t, epsilon)


def heatmap(
    ngt_range: tuple[float, float] = (1e-2, 10.0),
    gt_range: tuple[float, float] = (1e-3, 1e-1),
    resolution: int | tuple[int, int] = 64,
    epsilon: float = 0.05,
    threads: int = 1,
) -> HeatmapGrid:
    """Log-spaced grid of ``log2 d_er`` over ``n*gamma*T`` and ``gamma*tau``.

    Only the two dimensionless combinations enter the estimate, so cells are
    evaluated with ``n = 1`` and ``tau = 1``.
    """
    res = (resolution, resolution) if isinstance(resolution, int) else tuple(resolution)
    if min(res) < 2:
        raise ValidationError("resolution must be >= 2")
    for name, (lo, hi) in (("ngt_range", ngt_range), ("gt_range", gt_range)):
        if not 0 < lo <= hi:
            raise ValidationError(f"{name} must satisfy 0 < lo <= hi, got {(lo, hi)}")
    ngt = np.geomspace(ngt_range[0], ngt_range[1], res[0])
    gt = np.geomspace(gt_range[0], gt_range[1], res[1])

    def row(i: int) -> list[ComplexityEstimate]:
        out = []
        for j, x in enumerate(ngt):
            try:
                out.append(effective_dimension(heatmap_params(x, gt[i], epsilon)))
            except NumericalError as exc:
                raise NumericalError(f"heatmap cell (gamma_tau={gt[i]:.6g}, n_gamma_T={x:.6g}): {exc}") from exc
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(gt.size)))
    else:
        rows = [row(i) for i in range(gt.size)]
    cells = np.array([[e.log_d_er / math.log(2) for e in r] for r in rows])
    qubits = np.array([[e.qubits for e in r] for r in rows], dtype=np.int64)
    return HeatmapGrid(ngt, gt, cells, qubits, epsilon)
