from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from erdim import algebra
from erdim.errors import NumericalError, ShapeError, SizeError
from erdim.lindblad import SIGMA_X, SIGMA_Z

from .conftest import random_complex, random_unitary


def taylor_exp(a, terms=30):
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


# ---------------------------------------------------------------- kron


def test_kron_identity():
    np.testing.assert_array_equal(algebra.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_pauli_pattern():
    k = algebra.kron(SIGMA_X, SIGMA_Z)
    # sigma_z = diag(-1, 1) in this basis, so the off-diagonal blocks are diag(-1, 1)
    assert k[0, 2] == -1 and k[1, 3] == 1
    assert k[2, 0] == -1 and k[3, 1] == 1
    assert np.count_nonzero(k) == 4


def test_kron_index_formula(rng):
    a = random_complex(rng, 3, 2)
    b = random_complex(rng, 2, 2)
    k = algebra.kron(a, b)
    assert k.shape == (6, 4)
    for i in range(3):
        for j in range(2):
            for p in range(2):
                for q in range(2):
                    assert abs(k[i * 2 + p, j * 2 + q] - a[i, j] * b[p, q]) <= 1e-15


def test_kron_mixed_product(rng):
    a, b = random_complex(rng, 3, 2), random_complex(rng, 2, 4)
    c, d = random_complex(rng, 2, 3), random_complex(rng, 4, 2)
    lhs = algebra.kron(a, b) @ algebra.kron(c, d)
    np.testing.assert_allclose(lhs, algebra.kron(a @ c, b @ d), atol=1e-12)


def test_kron_size_cap():
    big = np.zeros((1 << 7, 1 << 7))
    with pytest.raises(SizeError):
        algebra.kron(big, np.zeros((1 << 7, 1 << 7)))


def test_non_finite_entries_rejected():
    with pytest.raises(NumericalError):
        algebra.kron(np.array([[np.nan]]), np.eye(1))


# -------------------------------------------------------------- matexp


def test_matexp_zero_is_identity():
    np.testing.assert_array_equal(algebra.matexp(np.zeros((3, 3))), np.eye(3))


def test_matexp_diagonal_rotation():
    u = algebra.matexp(-1j * (np.pi / 2) * SIGMA_Z)
    # sigma_z = diag(-1, 1) gives exp(+i pi/2), exp(-i pi/2)
    np.testing.assert_allclose(u, np.diag([1j, -1j]), atol=1e-14)


def test_matexp_matches_taylor(rng):
    for _ in range(5):
        a = random_complex(rng, 4, 4)
        a /= np.linalg.norm(a, 2)
        np.testing.assert_allclose(algebra.matexp(a), taylor_exp(a), atol=1e-12)


def test_matexp_nilpotent():
    np.testing.assert_allclose(algebra.matexp([[0, 1], [0, 0]]), [[1, 1], [0, 1]], atol=1e-15)


@pytest.mark.parametrize("scale", [0.1, 1.0, 5.0, 10.0])
def test_matexp_relative_error_against_eigendecomposition(rng, scale):
    x = random_complex(rng, 6, 6)
    h = 0.5 * (x + x.conj().T)
    a = -1j * h * scale / np.linalg.norm(h, 2) + 0.3 * scale / 10 * np.diag(np.arange(6))
    w, v = np.linalg.eig(a)
    exact = v @ np.diag(np.exp(w)) @ np.linalg.inv(v)
    err = np.linalg.norm(algebra.matexp(a) - exact) / np.linalg.norm(exact)
    assert err <= 1e-11


def test_matexp_commuting_sum(rng):
    a = np.diag(random_complex(rng, 5))
    b = np.diag(random_complex(rng, 5))
    np.testing.assert_allclose(
        algebra.matexp(a + b), algebra.matexp(a) @ algebra.matexp(b), rtol=1e-11, atol=1e-11
    )


def test_matexp_unitary(rng):
    x = random_complex(rng, 8, 8)
    u = algebra.matexp(-1j * 3.0 * (x + x.conj().T))
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-10)


def test_matexp_errors():
    with pytest.raises(ShapeError):
        algebra.matexp(np.zeros((2, 3)))
    with pytest.raises(NumericalError):
        algebra.matexp(np.diag([1000.0, 0.0]))


# ----------------------------------------------------------------- svd


def _check_svd(a, u, s, vh, tol=1e-10):
    scale = max(1.0, np.linalg.norm(a))
    np.testing.assert_allclose(u @ np.diag(s) @ vh, a, atol=tol * scale)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(s.size), atol=tol)
    np.testing.assert_allclose(vh @ vh.conj().T, np.eye(s.size), atol=tol)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)


def test_svd_identity(backend):
    u, s, vh = algebra.svd(np.eye(3), backend=backend)
    np.testing.assert_allclose(s, [1, 1, 1], atol=1e-15)


def test_svd_rank_deficient(backend):
    a = np.diag([3.0, 0.0])
    u, s, vh = algebra.svd(a, backend=backend)
    np.testing.assert_allclose(s, [3, 0], atol=1e-15)
    _check_svd(a, u, s, vh)


@pytest.mark.parametrize("shape", [(6, 4), (4, 6), (1, 5), (7, 1), (16, 48)])
def test_svd_gram_oracle(rng, backend, shape):
    a = random_complex(rng, *shape)
    u, s, vh = algebra.svd(a, backend=backend)
    _check_svd(a, u, s, vh)
    gram = a.conj().T @ a if shape[0] >= shape[1] else a @ a.conj().T
    np.testing.assert_allclose(s**2, np.sort(np.linalg.eigvalsh(gram))[::-1], atol=1e-9)


def test_svd_low_rank_completion(rng, backend):
    a = random_complex(rng, 8, 2) @ random_complex(rng, 2, 5)
    u, s, vh = algebra.svd(a, backend=backend)
    assert np.sum(s > 1e-10 * s[0]) == 2
    _check_svd(a, u, s, vh)


def test_svd_unitary_invariance(rng, backend):
    a = random_complex(rng, 5, 4)
    s = algebra.singular_values(a, backend=backend)
    s2 = algebra.singular_values(random_unitary(rng, 5) @ a @ random_unitary(rng, 4), backend=backend)
    np.testing.assert_allclose(s, s2, atol=1e-9)


def test_svd_empty_and_zero(backend):
    u, s, vh = algebra.svd(np.zeros((3, 2)), backend=backend)
    np.testing.assert_array_equal(s, [0, 0])
    _check_svd(np.zeros((3, 2)), u, s, vh)


@settings(max_examples=40, deadline=None)
@given(
    m=st.integers(1, 7),
    n=st.integers(1, 7),
    seed=st.integers(0, 2**32 - 1),
    log_scale=st.floats(-6, 6),
)
def test_svd_property(m, n, seed, log_scale):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, m, n) * 10.0**log_scale
    u, s, vh = algebra.svd(a)
    _check_svd(a, u, s, vh)


# ------------------------------------------------------ vectorization


def test_vectorize_basis():
    np.testing.assert_array_equal(algebra.vectorize(np.diag([1, 0])), [1, 0, 0, 0])


def test_vectorize_roundtrip(rng):
    rho = random_complex(rng, 3, 3)
    np.testing.assert_array_equal(algebra.devectorize(algebra.vectorize(rho)), rho)


def test_vectorize_sandwich_identity(rng):
    for _ in range(10):
        q, rho, p = (random_complex(rng, 2, 2) for _ in range(3))
        lhs = algebra.vectorize(q @ rho @ p)
        rhs = algebra.kron(q, p.T) @ algebra.vectorize(rho)
        np.testing.assert_allclose(lhs, rhs, atol=1e-13)


def test_devectorize_rejects_non_square_length():
    with pytest.raises(ShapeError):
        algebra.devectorize(np.zeros(5))


def test_vectorize_rejects_rectangular():
    with pytest.raises(ShapeError):
        algebra.vectorize(np.zeros((2, 3)))


def test_is_hermitian():
    assert algebra.is_hermitian(SIGMA_X)
    assert not algebra.is_hermitian(np.array([[0, 1], [0, 0]]))
    assert math.isclose(float(np.trace(algebra.matexp(np.zeros((2, 2)))).real), 2.0)
