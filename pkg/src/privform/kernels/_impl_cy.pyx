# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Mirrors the contracts of ``_impl_py``: a cyclic Jacobi eigensolver for small
dense symmetric matrices and the blockwise state recurrence used by the
simulator.
"""

from libc.math cimport fabs, sqrt

import numpy as np

BACKEND = "cython"


def jacobi_rotate(double[:, ::1] a, double[:, ::1] v, double tol, int max_sweeps):
    """Cyclic Jacobi rotations on the symmetric matrix ``a``, in place.

    Returns the number of sweeps used, or -1 if the off-diagonal Frobenius
    norm is still above ``tol`` after ``max_sweeps`` sweeps.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double off, apq, diff, phi, t, c, s, tau, tmp_p, tmp_q

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        off = sqrt(2.0 * off)
        if off <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if fabs(apq) < fabs(diff) * 1e-36:
                    t = apq / diff
                else:
                    phi = diff / (2.0 * apq)
                    t = 1.0 / (fabs(phi) + sqrt(phi * phi + 1.0))
                    if phi < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] = a[p, p] - t * apq
                a[q, q] = a[q, q] + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(p):
                    tmp_p = a[i, p]
                    tmp_q = a[i, q]
                    a[i, p] = tmp_p - s * (tmp_q + tau * tmp_p)
                    a[i, q] = tmp_q + s * (tmp_p - tau * tmp_q)
                    a[p, i] = a[i, p]
                    a[q, i] = a[i, q]
                for i in range(p + 1, q):
                    tmp_p = a[p, i]
                    tmp_q = a[i, q]
                    a[p, i] = tmp_p - s * (tmp_q + tau * tmp_p)
                    a[i, q] = tmp_q + s * (tmp_p - tau * tmp_q)
                    a[i, p] = a[p, i]
                    a[q, i] = a[i, q]
                for i in range(q + 1, n):
                    tmp_p = a[p, i]
                    tmp_q = a[q, i]
                    a[p, i] = tmp_p - s * (tmp_q + tau * tmp_p)
                    a[q, i] = tmp_q + s * (tmp_p - tau * tmp_q)
                    a[i, p] = a[p, i]
                    a[i, q] = a[q, i]
                for i in range(n):
                    tmp_p = v[i, p]
                    tmp_q = v[i, q]
                    v[i, p] = tmp_p - s * (tmp_q + tau * tmp_p)
                    v[i, q] = tmp_q + s * (tmp_p - tau * tmp_q)
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += a[p, q] * a[p, q]
    off = sqrt(2.0 * off)
    return 0 if off <= tol else -1


def simulate_chain(
    double[:, ::1] mstep,
    double[:, ::1] ga,
    double[:, ::1] x,
    double[:, :, ::1] vblk,
    double[:, :, ::1] nblk,
    double[:, :, ::1] xout,
):
    """One block of the state recurrence x <- mstep @ x + ga @ v(k) + n(k).

    ``x`` (N, d) is advanced in place; each intermediate state is written to
    ``xout`` (B, N, d).
    """
    cdef Py_ssize_t nsteps = vblk.shape[0]
    cdef Py_ssize_t n = mstep.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t k, i, j, l
    cdef double acc

    tmp_arr = np.empty((n, d), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr

    for k in range(nsteps):
        for i in range(n):
            for l in range(d):
                acc = nblk[k, i, l]
                for j in range(n):
                    acc += mstep[i, j] * x[j, l] + ga[i, j] * vblk[k, j, l]
                tmp[i, l] = acc
        for i in range(n):
            for l in range(d):
                x[i, l] = tmp[i, l]
                xout[k, i, l] = tmp[i, l]
