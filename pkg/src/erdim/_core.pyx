# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: one-sided Jacobi SVD and the Volterra time stepper.

Mirrors ``erdim._fallback`` function for function.
"""

import numpy as np
from libc.float cimport DBL_EPSILON
from libc.math cimport sqrt

NAME = "cython"


def jacobi_svd_inplace(double complex[:, ::1] a, double complex[:, ::1] v,
                       double tol, int max_sweeps):
    """Cyclic one-sided Jacobi on the columns of ``a``; updates ``v`` alongside.

    Returns sweeps used, -1 if ``max_sweeps`` was exhausted.
    """
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t nv = v.shape[0]
    if n < 2:
        return 0
    # columns stored contiguously as interleaved (re, im) pairs
    cdef double[:, ::1] ac = np.ascontiguousarray(np.asarray(a).T).view(np.float64)
    cdef double[:, ::1] vc = np.ascontiguousarray(np.asarray(v).T).view(np.float64)
    cdef int sweeps = _jacobi(ac, vc, m, n, nv, tol, max_sweeps)
    np.asarray(a)[...] = np.asarray(ac).view(np.complex128).T
    np.asarray(v)[...] = np.asarray(vc).view(np.complex128).T
    return sweeps


cdef int _jacobi(double[:, ::1] a, double[:, ::1] v, Py_ssize_t m, Py_ssize_t n,
                 Py_ssize_t nv, double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef bint rotated
    cdef double alpha, beta, gr, gi, mag, zeta, t, c, s, pr, pi
    cdef double xr, xi, yr, yi
    # columns below eps * ||A||_F are rounding noise; rotating them never settles
    cdef double floor = 0.0
    for p in range(n):
        for i in range(2 * m):
            floor += a[p, i] * a[p, i]
    floor *= DBL_EPSILON * DBL_EPSILON
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gr = 0.0
                gi = 0.0
                for i in range(m):
                    xr = a[p, 2 * i]
                    xi = a[p, 2 * i + 1]
                    yr = a[q, 2 * i]
                    yi = a[q, 2 * i + 1]
                    alpha += xr * xr + xi * xi
                    beta += yr * yr + yi * yi
                    # gamma = conj(x) * y
                    gr += xr * yr + xi * yi
                    gi += xr * yi - xi * yr
                mag = sqrt(gr * gr + gi * gi)
                if not (mag > tol * sqrt(alpha * beta)) or alpha <= floor or beta <= floor:
                    continue
                rotated = True
                pr = gr / mag
                pi = gi / mag
                zeta = (beta - alpha) / (2.0 * mag)
                if zeta >= 0:
                    t = 1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = c * t
                _rotate(a, p, q, m, c, s, pr, pi)
                _rotate(v, p, q, nv, c, s, pr, pi)
        if not rotated:
            return sweep
    return -1


cdef inline void _rotate(double[:, ::1] a, Py_ssize_t p, Py_ssize_t q, Py_ssize_t m,
                         double c, double s, double pr, double pi) noexcept nogil:
    """x <- c x - s y conj(phase), y <- s x + c y conj(phase) on columns p, q."""
    cdef Py_ssize_t i
    cdef double xr, xi, yr, yi, wr, wi
    for i in range(m):
        xr = a[p, 2 * i]
        xi = a[p, 2 * i + 1]
        yr = a[q, 2 * i]
        yi = a[q, 2 * i + 1]
        wr = yr * pr + yi * pi
        wi = yi * pr - yr * pi
        a[p, 2 * i] = c * xr - s * wr
        a[p, 2 * i + 1] = c * xi - s * wi
        a[q, 2 * i] = s * xr + c * wr
        a[q, 2 * i + 1] = s * xi + c * wi


cdef enum:
    LEAF = 64


def volterra_trapezoid(kernel, double omega, double coupling, double h, Py_ssize_t n_steps):
    """Implicit trapezoidal scheme for the linear Volterra equation (see the fallback).

    The history sum ``S[t] = sum_{j=1}^{t-1} K[t-j] a[j]`` is accumulated by
    divide and conquer: once the left half of a time range is known, its
    contribution to every step in the right half is added with one FFT
    convolution, and only short leaves are summed directly. Cost is
    O(N log^2 N) instead of O(N^2); results match the direct sum to rounding.
    """
    g = np.ascontiguousarray(kernel, dtype=np.complex128)[: n_steps + 1]
    if g.shape[0] < n_steps + 1:
        raise ValueError("kernel shorter than n_steps + 1")
    out = np.zeros(n_steps + 1, dtype=np.complex128)
    far = np.zeros(n_steps + 1, dtype=np.complex128)
    cdef _Stepper st = _Stepper(g, out, far, omega, coupling, h)
    out[0] = 1.0
    if n_steps > 0:
        _solve(st, g, out, far, 1, n_steps + 1)
    return out


cdef class _Stepper:
    cdef double complex[::1] g, a, far
    cdef double complex lam, denom, f_prev
    cdef double coupling, h

    def __init__(self, g, a, far, double omega, double coupling, double h):
        self.g = g
        self.a = a
        self.far = far
        self.coupling = coupling
        self.h = h
        self.lam = -1j * omega - coupling * 0.5 * h * g[0]
        self.denom = 1.0 - 0.5 * h * self.lam
        self.f_prev = -1j * omega

    cdef void leaf(self, Py_ssize_t t0, Py_ssize_t t1) noexcept nogil:
        cdef Py_ssize_t t, j
        cdef double complex hist, nxt
        for t in range(t0, t1):
            hist = 0.5 * self.g[t] * self.a[0] + self.far[t]
            for j in range(t0, t):
                hist = hist + self.g[t - j] * self.a[j]
            hist = hist * self.h
            nxt = (self.a[t - 1] + 0.5 * self.h * (self.f_prev - self.coupling * hist)) / self.denom
            self.a[t] = nxt
            self.f_prev = self.lam * nxt - self.coupling * hist


cdef void _solve(_Stepper st, g, a, far, Py_ssize_t lo, Py_ssize_t hi):
    """Fill a[lo:hi], given far[lo:hi] already holds all terms with j < lo."""
    if hi - lo <= LEAF:
        st.leaf(lo, hi)
        return
    cdef Py_ssize_t mid = (lo + hi) // 2
    _solve(st, g, a, far, lo, mid)
    # far[t] += sum_{j in [lo, mid)} g[t - j] a[j] for t in [mid, hi)
    cdef Py_ssize_t span = hi - lo
    cdef Py_ssize_t size = 1
    while size < span + (mid - lo):
        size *= 2
    conv = np.fft.ifft(np.fft.fft(a[lo:mid], size) * np.fft.fft(g[:span], size))
    far[mid:hi] += conv[mid - lo : span]
    _solve(st, g, a, far, mid, hi)
