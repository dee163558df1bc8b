"""Numpy fallback implementations of the hot kernels.

Same contracts as the compiled versions in ``_impl_cy``; selected at import
time by :mod:`privform.kernels` when the extension is unavailable or when
``PRIVFORM_PURE_PYTHON=1``.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def jacobi_rotate(a: np.ndarray, v: np.ndarray, tol: float, max_sweeps: int) -> int:
    """Cyclic Jacobi rotations on the symmetric matrix ``a``, in place.

    ``v`` accumulates the rotations (columns end up as eigenvectors and the
    diagonal of ``a`` as eigenvalues).  Returns the number of sweeps used, or
    -1 if the off-diagonal Frobenius norm is still above ``tol`` after
    ``max_sweeps`` sweeps.
    """
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= tol:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < abs(diff) * 1e-36:
                    t = apq / diff
                else:
                    phi = diff / (2.0 * apq)
                    t = 1.0 / (abs(phi) + math.sqrt(phi * phi + 1.0))
                    if phi < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
    return 0 if off <= tol else -1


def simulate_chain(
    mstep: np.ndarray,
    ga: np.ndarray,
    x: np.ndarray,
    vblk: np.ndarray,
    nblk: np.ndarray,
    xout: np.ndarray,
) -> None:
    """One block of the state recurrence x <- mstep @ x + ga @ v(k) + n(k).

    ``x`` (N, d) is advanced in place; each intermediate state is written to
    ``xout`` (B, N, d).
    """
    nsteps = vblk.shape[0]
    for k in range(nsteps):
        np.copyto(x, mstep @ x + ga @ vblk[k] + nblk[k])
        xout[k] = x
