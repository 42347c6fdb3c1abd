"""Dense complex linear algebra: Kronecker products, exponentials, SVD, vectorization.

All functions take and return ``numpy`` arrays of dtype ``complex128``; inputs
are never modified. Vectorization is row-major throughout the package, so
``vectorize(Q @ rho @ P) == kron(Q, P.T) @ vectorize(rho)``.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import _backend
from .errors import NumericalError, ShapeError, SizeError

MAX_ENTRIES = 1 << 26
JACOBI_TOL = 1e-15
JACOBI_MAX_SWEEPS = 60

# Pade [6/6] coefficients b_k = (12-k)! 6! / (12! k! (6-k)!)
_PADE6 = (1.0, 1.0 / 2, 5.0 / 44, 1.0 / 66, 1.0 / 792, 1.0 / 15840, 1.0 / 665280)


def as_matrix(a: ArrayLike, name: str = "a") -> NDArray[np.complex128]:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains non-finite entries")
    return arr


def _require_square(a: NDArray, name: str = "a") -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")


def kron(a: ArrayLike, b: ArrayLike) -> NDArray[np.complex128]:
    """Kronecker product; entry ``[i*b.rows + k, j*b.cols + l] = a[i, j] * b[k, l]``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows * cols > MAX_ENTRIES:
        raise SizeError(f"kron result {rows}x{cols} exceeds {MAX_ENTRIES} entries")
    return np.kron(a, b)


def matexp(a: ArrayLike) -> NDArray[np.complex128]:
    """Matrix exponential by scaling and squaring around a [6/6] Pade core.

    The argument is scaled by ``2**-s`` until its 1-norm is at most 0.5,
    where the Pade truncation error is below 1e-16, then squared back.
    """
    a = as_matrix(a)
    _require_square(a)
    dim = a.shape[0]
    if dim == 0:
        return a.copy()
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(math.ceil(math.log2(norm / 0.5)))
    x = a / (2.0**squarings)

    ident = np.eye(dim, dtype=np.complex128)
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    b = _PADE6
    even = b[0] * ident + b[2] * x2 + b[4] * x4 + b[6] * x6
    odd = x @ (b[1] * ident + b[3] * x2 + b[5] * x4)
    result = np.linalg.solve(even - odd, even + odd)
    with np.errstate(over="ignore", invalid="ignore"):  # reported below
        for _ in range(squarings):
            result = result @ result
    if not np.all(np.isfinite(result)):
        raise NumericalError(f"matexp overflow (1-norm of argument {norm:.3g})")
    return result


def _complete_orthonormal(u: NDArray[np.complex128], filled: NDArray[np.bool_]) -> None:
    """Replace unfilled columns of ``u`` by an orthonormal completion, in place."""
    m = u.shape[0]
    basis = np.eye(m, dtype=np.complex128)
    candidate = 0
    for col in np.flatnonzero(~filled):
        while True:
            if candidate >= m:
                raise NumericalError("could not complete orthonormal basis in svd")
            w = basis[:, candidate].copy()
            candidate += 1
            # two passes of Gram-Schmidt for stability
            for _ in range(2):
                w -= u[:, filled] @ (u[:, filled].conj().T @ w)
            nrm = np.linalg.norm(w)
            if nrm > 1e-8:
                u[:, col] = w / nrm
                filled[col] = True
                break


def svd(a: ArrayLike, *, backend=None):
    """Thin singular value decomposition by one-sided Jacobi rotations.

    Returns ``(U, s, Vh)`` with ``U @ diag(s) @ Vh == a``, ``s`` non-increasing
    and ``U``/``Vh`` having orthonormal columns/rows. ``backend`` selects a
    kernel module explicitly (see ``erdim._backend``).

    Raises:
        NumericalError: if the Jacobi iteration does not converge.
    """
    a = as_matrix(a)
    kern = backend or _backend.kernels
    m, n = a.shape
    if m < n:
        u, s, vh = svd(a.conj().T, backend=backend)
        return vh.conj().T, s, u.conj().T
    if n == 0:
        return np.zeros((m, 0), complex), np.zeros(0), np.zeros((0, 0), complex)

    work = np.array(a, dtype=np.complex128, order="C", copy=True)
    v = np.eye(n, dtype=np.complex128)
    sweeps = kern.jacobi_svd_inplace(work, v, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise NumericalError(f"Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    s = np.linalg.norm(work, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    work = work[:, order]
    v = v[:, order]

    cutoff = max(s[0], 1.0e-300) * 1e-14 * max(m, n) if s.size else 0.0
    filled = s > cutoff
    u = np.zeros((m, n), dtype=np.complex128)
    u[:, filled] = work[:, filled] / s[filled]
    if not filled.all():
        _complete_orthonormal(u, filled)
    return u, s, v.conj().T


def singular_values(a: ArrayLike, *, backend=None) -> NDArray[np.float64]:
    return svd(a, backend=backend)[1]


def vectorize(rho: ArrayLike) -> NDArray[np.complex128]:
    """Row-major flattening: ``rho[j, k]`` lands at index ``j * d + k``."""
    rho = as_matrix(rho, "rho")
    _require_square(rho, "rho")
    return rho.reshape(-1).copy()


def devectorize(v: ArrayLike) -> NDArray[np.complex128]:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise ShapeError(f"vector length {v.size} is not a perfect square")
    return v.reshape(d, d).copy()


def is_hermitian(a: NDArray, atol: float = 1e-12) -> bool:
    return bool(np.allclose(a, a.conj().T, rtol=0.0, atol=atol))
