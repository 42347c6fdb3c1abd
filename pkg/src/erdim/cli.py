"""Command-line entry point.

``erdim <subcommand> --config <file> --out <file> [--threads N] [--seed S]``

The config is a JSON file with one top-level object named after the
subcommand. Every block is validated (unknown keys rejected, all model
objects constructed) before any computation starts. Exit codes: 0 success,
2 invalid config, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__, complexity, exact_model, fitting, fixtures, lindblad, trotter_trn
from .algebra import kron
from .errors import ErdimError, NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


@dataclass
class Output:
    """Rows destined for the CSV file plus extra ``#`` metadata lines."""

    header: list[str]
    rows: list[Sequence[Any]]
    meta: list[tuple[str, str]]


# ----------------------------------------------------------- config access


class Block:
    """Dictionary wrapper that records which keys were read."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        self.data = data
        self.path = path
        self.used: set[str] = set()

    def _key(self, key: str) -> str:
        return f"{self.path}.{key}"

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default: Any = ...) -> Any:
        self.used.add(key)
        if key not in self.data:
            if default is ...:
                raise ConfigError(f"missing required key '{self._key(key)}'")
            return default
        return self.data[key]

    def number(self, key: str, default: Any = ..., *, positive: bool = False, minimum: float | None = None) -> float:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"'{self._key(key)}' must be a finite number, got {value!r}")
        if positive and not value > 0:
            raise ConfigError(f"'{self._key(key)}' must be positive, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"'{self._key(key)}' must be >= {minimum}, got {value!r}")
        return float(value)

    def integer(self, key: str, default: Any = ..., *, minimum: int = 0) -> int:
        value = self.raw(key, default)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigError(f"'{self._key(key)}' must be an integer >= {minimum}, got {value!r}")
        return value

    def pair(self, key: str, default: Any = ...) -> tuple[float, float]:
        value = self.raw(key, default)
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        ):
            raise ConfigError(f"'{self._key(key)}' must be a list of two numbers, got {value!r}")
        return float(value[0]), float(value[1])

    def choice(self, key: str, options: Sequence[str], default: Any = ...) -> str:
        value = self.raw(key, default)
        if value not in options:
            raise ConfigError(f"'{self._key(key)}' must be one of {list(options)}, got {value!r}")
        return value

    def sub(self, key: str, default: Any = ...) -> "Block":
        return Block(self.raw(key, default), self._key(key))

    def finish(self) -> None:
        unknown = sorted(set(self.data) - self.used)
        if unknown:
            raise ConfigError(f"unknown key '{self._key(unknown[0])}'")


def _build(key: str, factory: Callable[[], Any]) -> Any:
    """Construct a model object, reporting validation failures against ``key``."""
    try:
        return factory()
    except NumericalError:
        raise
    except (ErdimError, ValueError, TypeError) as exc:
        raise ConfigError(f"'{key}': {exc}") from exc


def _times(block: Block) -> np.ndarray:
    t_end = block.number("t_end", positive=True)
    points = block.integer("points", minimum=2)
    block.finish()
    return np.linspace(0.0, t_end, points)


# -------------------------------------------------------------- estimate


def _physical(block: Block) -> complexity.PhysicalParams:
    n = block.number("n", minimum=0)
    eps = block.number("epsilon")
    if block.has("gamma_tau") or block.has("n_gamma_t"):
        gt = block.number("gamma_tau", positive=True)
        ngt = block.number("n_gamma_t", minimum=0)
        tau = block.number("tau", 1.0, positive=True)
        return _build(block.path, lambda: complexity.PhysicalParams.from_dimensionless(n, gt, ngt, eps, tau))
    gamma = block.number("gamma")
    big_t = block.number("big_t")
    tau = block.number("tau")
    return _build(block.path, lambda: complexity.PhysicalParams(n, gamma, big_t, tau, eps))


def prepare_estimate(block: Block, args) -> Callable[[], Output]:
    p = _physical(block)
    mode = block.choice("mode", ("asymptotic", "exact"), "asymptotic")
    block.finish()

    def go() -> Output:
        e = complexity.effective_dimension(p, mode)
        header = ["n", "gamma", "big_t", "tau", "epsilon", "d_er", "d_er_ceil", "qubits",
                  "log2_d_er", "r_suff", "alpha_star"]
        row = [p.n, p.gamma, p.big_t, p.tau, p.epsilon, e.d_er, e.d_er_ceil, e.qubits,
               e.log_d_er / math.log(2), e.r_suff, e.alpha_star]
        return Output(header, [row], [("mode", mode)])

    return go


# --------------------------------------------------------------- heatmap


def prepare_heatmap(block: Block, args) -> Callable[[], Output]:
    ngt = block.pair("ngt_range", (1e-2, 10.0))
    gt = block.pair("gt_range", (1e-3, 1e-1))
    res = block.raw("resolution", 64)
    if isinstance(res, list):
        res = tuple(res)
    if not (
        (isinstance(res, int) and not isinstance(res, bool) and res >= 2)
        or (isinstance(res, tuple) and len(res) == 2 and all(isinstance(v, int) and not isinstance(v, bool) and v >= 2 for v in res))
    ):
        raise ConfigError(f"'{block.path}.resolution' must be an integer >= 2 or a pair of them")
    eps = block.number("epsilon", 0.05)
    cells = block.choice("cells", ("log2_d_er", "qubits"), "log2_d_er")
    block.finish()
    for key, (lo, hi) in (("ngt_range", ngt), ("gt_range", gt)):
        if not 0 < lo <= hi:
            raise ConfigError(f"'{block.path}.{key}' must satisfy 0 < lo <= hi")
    if not 0 < eps < 1:
        raise ConfigError(f"'{block.path}.epsilon' must lie in (0, 1)")
    if gt[1] >= 1:
        raise ConfigError(f"'{block.path}.gt_range' must stay below 1")

    def go() -> Output:
        grid = complexity.heatmap(ngt, gt, res, eps, threads=args.threads)
        values = grid.cells if cells == "log2_d_er" else grid.qubits
        header = ["gamma_tau/n_gamma_t"] + [_fmt(x) for x in grid.ngt_axis]
        rows = [[g] + list(v) for g, v in zip(grid.gt_axis, values)]
        return Output(header, rows, [("cells", cells), ("epsilon", _fmt(eps))])

    return go


# ------------------------------------------------------------- exact-run


def _exact_model(block: Block) -> tuple[exact_model.ExactModel, dict | None]:
    if block.has("fixture"):
        name = block.choice("fixture", fixtures.NAMES[:2])
        fx = fixtures.load(name)
        return fixtures.exact_model(fx), fx
    mb = block.sub("model")
    kw = {k: mb.number(k) for k in ("omega", "omega_min", "omega_max", "delta_omega", "g")}
    mb.finish()
    return _build(mb.path, lambda: exact_model.ExactModel(**kw)), None


def _fixture_times(block: Block, fx: dict | None) -> np.ndarray:
    if block.has("times") or fx is None:
        return _times(block.sub("times"))
    return fixtures.times(fx)


def prepare_exact_run(block: Block, args) -> Callable[[], Output]:
    model, fx = _exact_model(block)
    times = _fixture_times(block, fx)
    step = block.number("step", model.min_timescale / 20, positive=True)
    solvers = block.raw("solvers", ["finite", "continuum"])
    if not isinstance(solvers, list) or not solvers or any(s not in ("finite", "continuum") for s in solvers):
        raise ConfigError(f"'{block.path}.solvers' must be a non-empty subset of ['finite', 'continuum']")
    block.finish()
    if "finite" in solvers and model.n_modes > exact_model.MAX_MODES:
        raise ConfigError(f"'{block.path}.model': {model.n_modes} modes exceeds {exact_model.MAX_MODES}")
    if "continuum" in solvers and step > model.min_timescale / 20 * (1 + 1e-12):
        raise ConfigError(f"'{block.path}.step' must be <= tau/20 = {model.min_timescale / 20:.6g}")

    def go() -> Output:
        header, cols = ["t"], [times * model.omega_max]
        for name in solvers:
            if name == "finite":
                traj = exact_model.solve_finite(model, times)
            else:
                traj = exact_model.solve_continuum(model, times, step)
            header.append("sigma_z" if len(header) == 1 else f"sigma_z_{name}")
            cols.append(traj.sigma_z)
        meta = [("time_unit", "1/omega_max"), ("solvers", ",".join(solvers))]
        return Output(header, list(zip(*cols)), meta)

    return go


# ------------------------------------------------------------------- fit


def prepare_fit(block: Block, args) -> Callable[[], Output]:
    tb = block.sub("target")
    model, fx = _exact_model(tb)
    times = _fixture_times(tb, fx)
    tb.finish()
    kinds = block.raw("fits", ["markov", "embedding"])
    if not isinstance(kinds, list) or not kinds or any(k not in ("markov", "embedding") for k in kinds):
        raise ConfigError(f"'{block.path}.fits' must be a non-empty subset of ['markov', 'embedding']")
    omega = block.number("omega", model.omega)
    max_evals = block.integer("max_evals", fitting.DEFAULT_MAX_EVALS, minimum=1)
    restarts = block.integer("restarts", fitting.DEFAULT_RESTARTS)
    block.finish()
    seed = args.seed

    def go() -> Output:
        target = exact_model.solve_finite(model, times)
        header, cols = ["t", "sigma_z"], [times * model.omega_max, target.sigma_z]
        meta = [("time_unit", "1/omega_max")]
        for kind in kinds:
            if kind == "markov":
                res = fitting.fit_markov(target, omega, seed=seed, max_evals=max_evals, restarts=restarts)
                curve = fitting.markov_sigma_z(lindblad.MarkovParams(**res.params), times)
            else:
                res = fitting.fit_embedding(target, seed=seed, omega=omega, max_evals=max_evals, restarts=restarts)
                p = lindblad.EmbeddingParams(**res.params)
                curve = fitting.embedding_sigma_z(p, times)
            header.append(f"sigma_z_{kind}")
            cols.append(curve)
            meta.append((f"{kind}.mse", _fmt(res.mse)))
            meta.append((f"{kind}.evaluations", str(res.evaluations)))
            meta.extend((f"{kind}.{k}", _fmt(v)) for k, v in res.params.items())
        return Output(header, list(zip(*cols)), meta)

    return go


# ---------------------------------------------------------- lindblad-run


_GENERATORS = ("gad", "embedding2", "pseudomode")


def prepare_lindblad_run(block: Block, args) -> Callable[[], Output]:
    kind = block.choice("generator", _GENERATORS)
    pb = block.sub("params")
    if kind == "gad":
        kw = {k: pb.number(k) for k in ("omega", "gamma_down", "gamma_up")}
        pb.finish()
        params = _build(pb.path, lambda: lindblad.MarkovParams(**kw))
        gen, rho0, dim_env = lindblad.gad_generator(params), lindblad.EXCITED, 1
    elif kind == "embedding2":
        kw = {k: pb.number(k) for k in lindblad.EmbeddingParams.NAMES}
        pb.finish()
        params = _build(pb.path, lambda: lindblad.EmbeddingParams(**kw))
        gen = lindblad.embedding2_generator(params)
        rho0, dim_env = kron(lindblad.EXCITED, lindblad.GROUND), 2
    else:
        kw = {k: pb.number(k) for k in ("omega0", "omega", "omega_rabi", "gamma_decay")}
        kw["n0"] = pb.number("n0", 0.0)
        cutoff = pb.integer("cutoff", minimum=1)
        pb.finish()
        params = _build(pb.path, lambda: lindblad.PseudomodeParams(cutoff=cutoff, **kw))
        gen = lindblad.pseudomode_generator(params)
        rho0, dim_env = lindblad.pseudomode_initial_state(cutoff), cutoff
    times = _times(block.sub("times"))
    block.finish()
    env = np.eye(dim_env)
    observables = {
        "sigma_z": kron(lindblad.SIGMA_Z, env),
        "excited": kron(lindblad.EXCITED, env),
    }

    def go() -> Output:
        traj = lindblad.propagate(gen, rho0, times, observables, keep_states=False)
        rows = list(zip(times, traj.observables["sigma_z"], traj.observables["excited"]))
        return Output(["t", "sigma_z", "excited"], rows, [("generator", kind)])

    return go


# ------------------------------------------------------------ trn-verify


def prepare_trn_verify(block: Block, args) -> Callable[[], Output]:
    count = block.integer("instances", 10, minimum=1)
    dr_range = block.pair("d_r", (2, 4))
    steps_range = block.pair("steps", (4, 16))
    gt_range = block.pair("gamma_tau", (1e-3, 1e-2))
    n = block.integer("n", 1, minimum=1)
    block.finish()
    for key, (lo, hi), cap in (
        ("d_r", dr_range, trotter_trn.MAX_RESERVOIR_DIM),
        ("steps", steps_range, trotter_trn.MAX_STEPS),
    ):
        if lo != int(lo) or hi != int(hi) or not 1 <= lo <= hi <= cap:
            raise ConfigError(f"'{block.path}.{key}' must be integers with 1 <= lo <= hi <= {cap}")
    if steps_range[0] < 2:
        raise ConfigError(f"'{block.path}.steps' must start at >= 2 so that a temporal cut exists")
    if not 0 < gt_range[0] <= gt_range[1] <= trotter_trn.MAX_TROTTER_STEP:
        raise ConfigError(f"'{block.path}.gamma_tau' must satisfy 0 < lo <= hi <= {trotter_trn.MAX_TROTTER_STEP}")
    seed = args.seed

    def go() -> Output:
        rng = np.random.default_rng(seed)
        rows = []
        violations = 0
        for inst in range(count):
            dr = int(rng.integers(int(dr_range[0]), int(dr_range[1]) + 1))
            steps = int(rng.integers(int(steps_range[0]), int(steps_range[1]) + 1))
            gt = float(10 ** rng.uniform(math.log10(gt_range[0]), math.log10(gt_range[1])))
            m = trotter_trn.random_model(rng, dr, n=n, gamma=1.0)
            trn = trotter_trn.build_trn(m, gt, steps)
            spectra = trotter_trn.bond_spectra(trn)
            for r in range(1, max(trn.bond_dims) + 1):
                _, eps = trotter_trn.truncate(trn, r)
                for alpha in trotter_trn.ALPHA_GRID:
                    entropies = [trotter_trn.renyi_entropy(s, alpha) for s in spectra]
                    cut = int(np.argmax(entropies))
                    bound = trotter_trn.truncation_bound(entropies[cut], r, alpha)
                    holds = eps == 0.0 or math.log(eps) <= bound
                    violations += not holds
                    rows.append([inst, dr, steps, gt, cut, alpha, entropies[cut], r, eps, bound, int(holds)])
        header = ["instance", "d_r", "steps", "gamma_tau", "cut", "alpha", "s_alpha", "r", "eps", "bound", "holds"]
        return Output(header, rows, [("violations", str(violations))])

    return go


# ------------------------------------------------------------------ main

PREPARERS: dict[str, Callable[[Block, argparse.Namespace], Callable[[], Output]]] = {
    "estimate": prepare_estimate,
    "heatmap": prepare_heatmap,
    "exact-run": prepare_exact_run,
    "fit": prepare_fit,
    "lindblad-run": prepare_lindblad_run,
    "trn-verify": prepare_trn_verify,
}


def _fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % x
    return str(x)


def render_csv(out: Output, meta: list[tuple[str, str]]) -> str:
    buf = io.StringIO()
    for key, value in meta + out.meta:
        buf.write(f"# {key}: {value}\n")
    buf.write(",".join(out.header) + "\n")
    for row in out.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".erdim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("ERDIM_THREADS")
    if env is None:
        return 1
    try:
        threads = int(env)
    except ValueError:
        raise ConfigError(f"ERDIM_THREADS must be a positive integer, got {env!r}") from None
    if threads < 1:
        raise ConfigError(f"ERDIM_THREADS must be a positive integer, got {env!r}")
    return threads


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="erdim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"erdim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in PREPARERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", required=True, help="CSV output path")
        p.add_argument("--threads", type=int, default=None, help="worker threads (default: $ERDIM_THREADS or 1)")
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        args.threads = _threads(args.threads)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        try:
            with open(args.config, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc.strerror}") from None
        try:
            config = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        root = Block(config, "config")
        block = root.sub(args.command)
        unknown = sorted(set(config) - set(PREPARERS))
        if unknown:
            raise ConfigError(f"unknown key 'config.{unknown[0]}'")
        job = PREPARERS[args.command](block, args)
    except ConfigError as exc:
        print(f"erdim: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"erdim: numerical failure while validating {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    try:
        out = job()
    except NumericalError as exc:
        print(f"erdim: numerical failure in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ErdimError as exc:
        print(f"erdim: {args.command} rejected its inputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    meta = [
        ("tool", f"erdim {__version__}"),
        ("config_sha256", hashlib.sha256(raw).hexdigest()),
        ("seed", str(args.seed)),
        ("command", args.command),
    ]
    _write_atomic(args.out, render_csv(out, meta))
    return EXIT_OK


def main() -> None:
    sys.exit(run())
