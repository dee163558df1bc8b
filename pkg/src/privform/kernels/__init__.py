"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension (``_impl_cy``, built from Cython) is preferred; the
numpy implementation (``_impl_py``) is selected when the extension is missing
or when the environment variable ``PRIVFORM_PURE_PYTHON=1`` is set.  Both
implement the same algorithms; results agree to floating-point tolerance and
each backend is bit-reproducible on its own.
"""

from __future__ import annotations

import math
import os

import numpy as np

from ..errors import EigensolverError

if os.environ.get("PRIVFORM_PURE_PYTHON") == "1":
    from . import _impl_py as _impl
else:
    try:
        from . import _impl_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _impl_py as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND

# Off-diagonal Frobenius threshold is relative to max(1, ||A||_F); 100 sweeps
# is far beyond what cyclic Jacobi needs at the matrix sizes used here.
JACOBI_TOL_FACTOR = 1e-12
JACOBI_MAX_SWEEPS = 100


def backend_name() -> str:
    return BACKEND


def jacobi_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns, each with its largest-magnitude entry positive.

    Raises:
        EigensolverError: off-diagonal norm above threshold after the sweep cap.
    """
    work = np.array(a, dtype=np.float64, order="C")
    n = work.shape[0]
    if work.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 1:
        return work.reshape(1).copy(), np.ones((1, 1))
    vecs = np.eye(n, order="C")
    tol = JACOBI_TOL_FACTOR * max(1.0, float(np.linalg.norm(work)))
    sweeps = _impl.jacobi_rotate(work, vecs, tol, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        off = math.sqrt(2.0 * float(np.sum(np.triu(work, 1) ** 2)))
        raise EigensolverError("Jacobi sweeps exhausted", residual=off)
    vals = np.diag(work).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = np.ascontiguousarray(vecs[:, order])
    for j in range(n):
        k = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[k, j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    return vals, vecs


def simulate_chain(
    mstep: np.ndarray,
    ga: np.ndarray,
    x: np.ndarray,
    vblk: np.ndarray,
    nblk: np.ndarray,
    xout: np.ndarray,
) -> None:
    """Advance ``x`` through one block of the state recurrence (in place)."""
    _impl.simulate_chain(mstep, ga, x, vblk, nblk, xout)
