"""Derivative-free fitting of low-dimensional GKSL models to a target trajectory.

Two surrogate families are fitted to ``tr[sigma_z rho(t)]``:

* the qubit alone under generalized amplitude damping (effective reservoir of
  dimension 1, i.e. the best Markov approximation), and
* the qubit plus one damped two-level effective reservoir.

Rates are optimized in log space so every trial generator is a valid GKSL form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .algebra import kron, matexp, vectorize
from .errors import ObjectiveError, ValidationError
from .lindblad import (
    EXCITED,
    GROUND,
    SIGMA_Z,
    EmbeddingParams,
    MarkovParams,
    Trajectory,
    build_superoperator,
    embedding2_generator,
    gad_generator,
)

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5
DEFAULT_MAX_EVALS = 2000
DEFAULT_RESTARTS = 5


@dataclass
class FitResult:
    params: dict[str, float]
    mse: float
    evaluations: int
    seed: int
    x: NDArray[np.float64] = field(repr=False)
    history: list[float] = field(default_factory=list, repr=False)
    converged: bool = False


def nelder_mead(
    objective: Callable[[NDArray[np.float64]], float],
    x0: ArrayLike,
    *,
    max_iter: int = 10_000,
    max_evals: int | None = None,
    tol: float = 1e-10,
    seed: int = 0,
    restarts: int = 0,
    step: float | ArrayLike = 0.1,
    names: Sequence[str] | None = None,
) -> FitResult:
    """Minimize ``objective`` with the Nelder-Mead simplex method.

    Coefficients are the standard (1, 2, 0.5, 0.5). A run stops when the
    simplex diameter drops below ``tol`` or an iteration/evaluation budget is
    exhausted. Each of the ``restarts`` extra runs starts from the best point
    so far with a fresh simplex whose edge lengths are drawn from a generator
    seeded by ``seed``, so identical inputs give identical results.

    ``history`` records the best objective value after every iteration.

    Raises:
        ObjectiveError: if the objective returns a non-finite value.
    """
    x0 = np.array(x0, dtype=float).reshape(-1)
    dim = x0.size
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(dim))
    if len(names) != dim:
        raise ValidationError("names and x0 differ in length")
    steps = np.broadcast_to(np.asarray(step, dtype=float), (dim,)).copy()
    steps[steps == 0] = 0.1
    rng = np.random.default_rng(seed)
    budget = max_evals if max_evals is not None else math.inf
    evals = 0

    def f(x: NDArray) -> float:
        nonlocal evals
        evals += 1
        val = float(objective(x))
        if not math.isfinite(val):
            raise ObjectiveError(f"objective returned {val} at x={x.tolist()}", point=x.copy())
        return val

    best_x = x0.copy()
    best_f = f(best_x)
    history: list[float] = []
    converged = False

    for run in range(restarts + 1):
        if evals >= budget:
            break
        scale = steps if run == 0 else steps * rng.uniform(0.5, 1.5, size=dim)
        simplex = np.vstack([best_x] + [best_x + scale[i] * np.eye(dim)[i] for i in range(dim)])
        values = np.array([best_f] + [f(v) for v in simplex[1:]])
        converged = False
        for _ in range(max_iter):
            order = np.argsort(values, kind="stable")
            simplex, values = simplex[order], values[order]
            history.append(float(values[0]))
            if np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)) < tol:
                converged = True
                break
            if evals >= budget:
                break
            centroid = simplex[:-1].mean(axis=0)
            worst = simplex[-1]
            xr = centroid + REFLECT * (centroid - worst)
            fr = f(xr)
            if fr < values[0]:
                xe = centroid + EXPAND * (xr - centroid)
                fe = f(xe)
                if fe < fr:
                    simplex[-1], values[-1] = xe, fe
                else:
                    simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[-2]:
                simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[-1]:
                xc = centroid + CONTRACT * (xr - centroid)
                fc = f(xc)
                if fc <= fr:
                    simplex[-1], values[-1] = xc, fc
                    continue
            else:
                xc = centroid + CONTRACT * (worst - centroid)
                fc = f(xc)
                if fc < values[-1]:
                    simplex[-1], values[-1] = xc, fc
                    continue
            for i in range(1, dim + 1):
                simplex[i] = simplex[0] + SHRINK * (simplex[i] - simplex[0])
                values[i] = f(simplex[i])
        i = int(np.argmin(values))
        if values[i] < best_f:
            best_x, best_f = simplex[i].copy(), float(values[i])

    return FitResult(
        params=dict(zip(names, best_x.tolist())),
        mse=best_f,
        evaluations=evals,
        seed=seed,
        x=best_x,
        history=history,
        converged=converged,
    )


def _uniform_step(times: NDArray) -> float | None:
    gaps = np.diff(times)
    if gaps.size and np.allclose(gaps, gaps[0], rtol=1e-9, atol=0):
        return float(gaps[0])
    return None


def model_sigma_z(sup: NDArray, rho0: NDArray, times: NDArray, observable: NDArray) -> NDArray:
    """``tr[O exp(L t) rho0]`` on ``times`` (fast path for uniform grids)."""
    vec = vectorize(rho0)
    obs = observable.T.reshape(-1)
    out = np.empty(times.size)
    dt = _uniform_step(times)
    prop = matexp(sup * dt) if dt is not None else None
    prev = 0.0
    for k, t in enumerate(times):
        if t != prev:
            vec = (prop if dt is not None and abs(t - prev - dt) < 1e-12 * max(1, t) else matexp(sup * (t - prev))) @ vec
        out[k] = np.dot(obs, vec).real
        prev = t
    return out


def _target(target: Trajectory) -> tuple[NDArray, NDArray]:
    if "sigma_z" not in target.observables:
        raise ValidationError("target trajectory has no 'sigma_z' series")
    return target.times, target.sigma_z


def markov_sigma_z(p: MarkovParams, times: ArrayLike) -> NDArray:
    """Propagated ``tr[sigma_z rho(t)]`` of the damping model from the excited state."""
    times = np.asarray(times, dtype=float)
    return model_sigma_z(build_superoperator(gad_generator(p)), EXCITED, times, SIGMA_Z)


def embedding_sigma_z(p: EmbeddingParams, times: ArrayLike) -> NDArray:
    """System ``tr[sigma_z rho_S(t)]`` from ``|1><1| x |0><0|``, after tracing out the reservoir qubit."""
    times = np.asarray(times, dtype=float)
    sup = build_superoperator(embedding2_generator(p))
    # tr[sigma_z tr_ER rho] == tr[(sigma_z x 1) rho]
    return model_sigma_z(sup, kron(EXCITED, GROUND), times, kron(SIGMA_Z, np.eye(2)))


def _markov_from_x(omega: float, x: NDArray) -> MarkovParams:
    return MarkovParams(omega, math.exp(x[0]), math.exp(x[1]))


def _initial_rates(times: NDArray, sz: NDArray) -> tuple[float, float]:
    """Crude total rate and steady-state population from the target curve."""
    span = times[-1] - times[0] if times.size > 1 else 1.0
    pop = np.clip((sz + 1) / 2, 0.0, 1.0)
    p_inf = float(np.clip(pop[-max(1, pop.size // 10) :].mean(), 1e-3, 0.999))
    below = np.flatnonzero(pop < (1 + p_inf) / 2)
    t_half = times[below[0]] if below.size else span
    total = math.log(2) / max(t_half, span * 1e-3)
    return total * (1 - p_inf), total * p_inf


def fit_markov(
    target: Trajectory,
    omega: float,
    seed: int = 0,
    max_evals: int = DEFAULT_MAX_EVALS,
    restarts: int = DEFAULT_RESTARTS,
) -> FitResult:
    """Best damping-model approximation with fixed level splitting ``omega``."""
    times, sz = _target(target)

    def objective(x):
        return float(np.mean((markov_sigma_z(_markov_from_x(omega, x), times) - sz) ** 2))

    down, up = _initial_rates(times, sz)
    res = nelder_mead(
        objective,
        [math.log(down), math.log(up)],
        max_evals=max_evals,
        restarts=restarts,
        seed=seed,
        step=0.5,
        tol=1e-8,
        names=("log_gamma_down", "log_gamma_up"),
    )
    p = _markov_from_x(omega, res.x)
    res.params = {"omega": omega, "gamma_down": p.gamma_down, "gamma_up": p.gamma_up}
    return res


_EMBED_LOG = slice(3, 7)


def _embedding_from_x(x: NDArray) -> EmbeddingParams:
    return EmbeddingParams(x[0], x[1], x[2], *np.exp(x[_EMBED_LOG]))


def embedding_start(markov: FitResult, floor: float = 1e-3) -> NDArray[np.float64]:
    """Warm start reproducing a Markov fit: reservoir decoupled and undamped."""
    p = markov.params
    return np.array(
        [
            p["omega"],
            p["omega"],
            0.0,
            math.log(max(p["gamma_down"], floor)),
            math.log(max(p["gamma_up"], floor)),
            math.log(floor),
            math.log(floor),
        ]
    )


def fit_embedding(
    target: Trajectory,
    seed: int = 0,
    omega: float | None = None,
    max_evals: int = DEFAULT_MAX_EVALS,
    restarts: int = DEFAULT_RESTARTS,
    x0: ArrayLike | None = None,
) -> FitResult:
    """Fit all seven parameters of the qubit + two-level reservoir model.

    Without ``x0`` the search starts from a few deterministic candidates
    (a Markov warm start and resonant exchange guesses) and keeps the best.
    ``omega`` seeds the level splittings; it is estimated from the target's
    oscillation when omitted.
    """
    times, sz = _target(target)

    def objective(x):
        return float(np.mean((embedding_sigma_z(_embedding_from_x(x), times) - sz) ** 2))

    if x0 is not None:
        starts = [np.asarray(x0, dtype=float)]
    else:
        if omega is None:
            omega = 1.0
        markov = fit_markov(target, omega, seed=seed, max_evals=max_evals // 4, restarts=1)
        starts = [embedding_start(markov)] + _exchange_guesses(times, sz, omega)

    best: FitResult | None = None
    total_evals = 0
    for k, start in enumerate(starts):
        res = nelder_mead(
            objective,
            start,
            max_evals=max_evals,
            restarts=restarts,
            seed=seed + k,
            step=0.3,
            tol=1e-8,
            names=EmbeddingParams.NAMES,
        )
        total_evals += res.evaluations
        if best is None or res.mse < best.mse:
            best = res
    assert best is not None
    p = _embedding_from_x(best.x)
    best.params = dict(zip(EmbeddingParams.NAMES, p.as_vector().tolist()))
    best.evaluations = total_evals
    best.seed = seed
    return best


def _exchange_guesses(times: NDArray, sz: NDArray, omega: float) -> list[NDArray]:
    """Starting points for a coherent qubit <-> reservoir exchange."""
    span = times[-1] - times[0] if times.size > 1 else 1.0
    pop = (sz + 1) / 2
    # first local minimum of the excited population sets the exchange frequency
    mins = np.flatnonzero((pop[1:-1] < pop[:-2]) & (pop[1:-1] <= pop[2:])) + 1
    t_min = times[mins[0]] if mins.size else span / 2
    g = math.pi / (2 * max(t_min, 1e-6))
    decay = max(1.0 / span, 1e-3)
    guesses = []
    for g_scale in (1.0, 0.5):
        guesses.append(
            np.array([omega, omega, g * g_scale, math.log(1e-3), math.log(1e-3), math.log(decay), math.log(1e-3)])
        )
    return guesses
