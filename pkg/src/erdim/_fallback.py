"""Pure-NumPy implementations of the hot kernels.

Same signatures and in-place semantics as the compiled ``erdim._core``
module; selected automatically when the extension is unavailable.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # Brent-Luk ordering: n-1 rounds of n/2 disjoint pairs covering all p<q.
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p), np.array(q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_svd_inplace(a: np.ndarray, v: np.ndarray, tol: float, max_sweeps: int) -> int:
    """One-sided (Hestenes) Jacobi orthogonalisation of the columns of ``a``.

    On exit ``a`` holds ``A0 @ v`` with mutually orthogonal columns and ``v``
    is unitary. Returns the number of sweeps used, or -1 when the sweep cap
    was reached before convergence.
    """
    n = a.shape[1]
    if n < 2:
        return 0
    rounds = _round_robin(n)
    # columns below eps * ||A||_F are rounding noise; rotating them never settles
    floor = np.finfo(float).eps ** 2 * float(np.sum(np.abs(a) ** 2))
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p, q in rounds:
            ap = a[:, p]
            aq = a[:, q]
            alpha = np.einsum("ij,ij->j", ap.conj(), ap).real
            beta = np.einsum("ij,ij->j", aq.conj(), aq).real
            gamma = np.einsum("ij,ij->j", ap.conj(), aq)
            mag = np.abs(gamma)
            active = (mag > tol * np.sqrt(alpha * beta)) & (np.minimum(alpha, beta) > floor)
            if not active.any():
                continue
            rotated = True
            p, q = p[active], q[active]
            ap, aq = ap[:, active], aq[:, active]
            alpha, beta, mag = alpha[active], beta[active], mag[active]
            phase = gamma[active] / mag
            zeta = (beta - alpha) / (2.0 * mag)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            bq = aq * phase.conj()
            a[:, p] = c * ap - s * bq
            a[:, q] = s * ap + c * bq
            vp = v[:, p]
            vq = v[:, q] * phase.conj()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        if not rotated:
            return sweep
    return -1


def volterra_trapezoid(
    kernel: np.ndarray,
    omega: float,
    coupling: float,
    h: float,
    n_steps: int,
) -> np.ndarray:
    """Integrate a' = -i*omega*a - coupling * int_0^t K(t-s) a(s) ds, a(0)=1.

    ``kernel[k]`` is K(k*h). The trapezoidal rule discretizes both the
    memory integral and the time step. The resulting corrector equation is
    linear in the new value, so it is solved exactly instead of iterated;
    this is the fixed point a predictor-corrector loop would converge to.
    """
    kernel = np.ascontiguousarray(kernel, dtype=np.complex128)
    alpha = np.zeros(n_steps + 1, dtype=np.complex128)
    alpha[0] = 1.0
    # right-hand side is lam * a_{n+1} - coupling * hist_{n+1}
    lam = -1j * omega - coupling * 0.5 * h * kernel[0]
    denom = 1.0 - 0.5 * h * lam
    f_prev = -1j * omega * alpha[0]
    for n in range(n_steps):
        # memory integral at t_{n+1} minus the unknown endpoint term
        hist = 0.5 * kernel[n + 1] * alpha[0]
        if n > 0:
            hist += np.dot(kernel[n:0:-1], alpha[1 : n + 1])
        hist *= h
        alpha[n + 1] = (alpha[n] + 0.5 * h * (f_prev - coupling * hist)) / denom
        f_prev = lam * alpha[n + 1] - coupling * hist
    return alpha
