"""Compare the compiled and NumPy kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times the one-sided Jacobi SVD on random complex matrices of several shapes
and the Volterra history sum on the band kernel, checks that the two backends
agree, and prints a table of best-of-N wall times.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from erdim import _backend, algebra
from erdim.exact_model import ExactModel, kernel

SVD_SHAPES = ((8, 8), (48, 16), (64, 64), (128, 32))
VOLTERRA_STEPS = (1_000, 4_000, 16_000)


def _best(fn, repeat: int) -> float:
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-6)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _backend.compiled is None:
        raise SystemExit("compiled backend not built; run `pip install -e . --no-build-isolation`")
    fast, slow = _backend.compiled, _backend.fallback
    rng = np.random.default_rng(0)

    rows = []
    for m, n in SVD_SHAPES:
        a = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
        s_fast = algebra.svd(a, backend=fast)[1]
        s_slow = algebra.svd(a, backend=slow)[1]
        assert np.allclose(s_fast, s_slow, rtol=1e-12, atol=0)
        t_fast = _best(lambda: algebra.svd(a, backend=fast), args.repeat)
        t_slow = _best(lambda: algebra.svd(a, backend=slow), args.repeat)
        rows.append((f"svd {m}x{n}", t_fast, t_slow))

    model = ExactModel(1.5, 1.0, 2.0, 0.01, 0.01)
    for steps in VOLTERRA_STEPS:
        h = 10.0 / steps
        g = kernel(model, h * np.arange(steps + 1))
        c = model.memory_coupling
        a_fast = fast.volterra_trapezoid(g, model.omega, c, h, steps)
        a_slow = slow.volterra_trapezoid(g, model.omega, c, h, steps)
        assert np.allclose(a_fast, a_slow, rtol=0, atol=1e-12)
        t_fast = _best(lambda: fast.volterra_trapezoid(g, model.omega, c, h, steps), args.repeat)
        t_slow = _best(lambda: slow.volterra_trapezoid(g, model.omega, c, h, steps), args.repeat)
        rows.append((f"volterra {steps} steps", t_fast, t_slow))

    print(f"{'kernel':<24}{'cython [ms]':>14}{'python [ms]':>14}{'speedup':>10}")
    for name, t_fast, t_slow in rows:
        print(f"{name:<24}{t_fast * 1e3:>14.3f}{t_slow * 1e3:>14.3f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
