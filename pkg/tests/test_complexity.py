from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erdim import complexity as cx
from erdim.errors import DomainError, ValidationError

CHARGE_QUBIT = dict(n=1, gamma_tau=0.05, n_gamma_t=0.2, epsilon=0.05)


def grid_scan(p, step=1e-4):
    alphas = np.arange(step, 1.0, step)
    values = cx.log_rank_objective(p, alphas)
    i = int(np.argmin(values))
    return alphas[i], values[i]


def test_params_validation():
    with pytest.raises(ValidationError):
        cx.PhysicalParams(1, 2.0, 1.0, 0.5, 0.05)  # gamma*tau = 1
    with pytest.raises(ValidationError):
        cx.PhysicalParams(1, 0.1, 1.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        cx.PhysicalParams(1, 0.1, -1.0, 1.0, 0.5)
    with pytest.raises(ValidationError):
        cx.PhysicalParams(1, 0.1, math.nan, 1.0, 0.5)
    p = cx.PhysicalParams.from_dimensionless(**CHARGE_QUBIT)
    assert p.gamma_tau == pytest.approx(0.05) and p.n_gamma_t == pytest.approx(0.2)


def test_renyi_bound_no_coupling_terms():
    p = cx.PhysicalParams(0, 0.01, 10.0, 1.0, 0.05)
    for mode in ("exact", "asymptotic"):
        assert cx.renyi_bound(p, 0.4, mode) == 0.0


def test_renyi_bound_domain():
    p = cx.PhysicalParams.from_dimensionless(**CHARGE_QUBIT)
    for alpha in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            cx.renyi_bound(p, alpha)
    with pytest.raises(ValidationError):
        cx.renyi_bound(p, 0.5, "other")


@pytest.mark.parametrize(
    "alpha",
    [
        pytest.param(
            0.3,
            marks=pytest.mark.xfail(
                strict=True,
                reason="2n(gamma tau)^0.3 = 0.25 is not small, so the leading-order form overshoots by ~12%",
            ),
        ),
        0.5,
        0.7,
    ],
)
def test_renyi_modes_agree_at_small_step(alpha):
    p = cx.PhysicalParams(1, 1e-3, 100.0, 1.0, 0.05)
    exact = cx.renyi_bound(p, alpha, "exact")
    asym = cx.renyi_bound(p, alpha, "asymptotic")
    assert abs(exact - asym) / exact <= 0.05


def test_asymptotic_bound_dominates_exact():
    # ln(1+x) <= x, so the leading-order form is an upper bound of the product form
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = cx.PhysicalParams.from_dimensionless(int(rng.integers(1, 4)), 10 ** rng.uniform(-3, -1), 10 ** rng.uniform(-2, 1), 0.05)
        a = rng.uniform(0.05, 0.95)
        assert cx.renyi_bound(p, a, "exact") <= cx.renyi_bound(p, a, "asymptotic") * (1 + 1e-12)


def test_charge_qubit_needs_four_qubits():
    est = cx.effective_dimension(cx.PhysicalParams.from_dimensionless(**CHARGE_QUBIT))
    assert est.qubits == 4
    assert math.ceil(math.log2(est.d_er_ceil)) == 4
    assert 8 < est.d_er <= 16


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.2])
@pytest.mark.parametrize("big_t", [0.0, 1e-12])
def test_memoryless_limit(eps, big_t):
    p = cx.PhysicalParams(1, 0.05, big_t, 1.0, eps)
    est = cx.effective_dimension(p)
    assert est.d_er_ceil == 1 and est.qubits == 0
    assert cx.sufficient_rank(p) <= 1 + 1e-3


def test_sufficient_rank_matches_grid_scan():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = cx.PhysicalParams.from_dimensionless(1, 10 ** rng.uniform(-3, -1), 10 ** rng.uniform(-2, 1), 0.05)
        a_scan, v_scan = grid_scan(p)
        est = cx.effective_dimension(p)
        assert abs(cx.sufficient_rank(p) - math.exp(v_scan)) / math.exp(v_scan) <= 1e-3
        assert abs(est.alpha_star - a_scan) <= 1e-3
        assert abs(est.d_er**2 - est.r_suff) / est.r_suff <= 1e-3


def test_exact_mode_estimate_is_smaller():
    p = cx.PhysicalParams.from_dimensionless(**CHARGE_QUBIT)
    assert cx.effective_dimension(p, "exact").d_er <= cx.effective_dimension(p).d_er


@settings(max_examples=60, deadline=None)
@given(
    gt=st.floats(1e-3, 1e-1),
    ngt=st.floats(1e-2, 10.0),
    factor=st.floats(1.01, 3.0),
    eps=st.sampled_from([0.01, 0.05, 0.2]),
)
def test_monotonicity(gt, ngt, factor, eps):
    base = cx.effective_dimension(cx.heatmap_params(ngt, gt, eps)).d_er
    longer = cx.effective_dimension(cx.heatmap_params(ngt * factor, gt, eps)).d_er
    tol = 1e-9 * base
    assert longer >= base - tol
    if gt * factor < 1:
        coarser = cx.effective_dimension(cx.heatmap_params(ngt, gt * factor, eps)).d_er
        assert coarser <= base + tol
    looser = cx.effective_dimension(cx.heatmap_params(ngt, gt, min(0.99, eps * factor))).d_er
    assert looser <= base + tol


def test_heatmap_corner_is_charge_qubit():
    grid = cx.heatmap((0.2, 2.0), (0.05, 0.5), 2, 0.05)
    assert grid.cells.shape == (2, 2)
    assert grid.gt_axis[0] == pytest.approx(0.05) and grid.ngt_axis[0] == pytest.approx(0.2)
    assert grid.qubits[0, 0] == 4


def test_heatmap_recomputation_and_threads():
    grid = cx.heatmap(resolution=12, threads=1)
    threaded = cx.heatmap(resolution=12, threads=4)
    np.testing.assert_array_equal(grid.cells, threaded.cells)
    rng = np.random.default_rng(3)
    for _ in range(8):
        i, j = rng.integers(0, 12, size=2)
        est = cx.effective_dimension(cx.heatmap_params(grid.ngt_axis[j], grid.gt_axis[i], 0.05))
        assert grid.cells[i, j] == est.log_d_er / math.log(2)
        assert grid.qubits[i, j] == est.qubits


def test_heatmap_validation():
    with pytest.raises(ValidationError):
        cx.heatmap(resolution=0)
    with pytest.raises(ValidationError):
        cx.heatmap(resolution=(1, 8))
    with pytest.raises(ValidationError):
        cx.heatmap(ngt_range=(1.0, 0.5))
