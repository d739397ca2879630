"""Hot numeric kernels: fixed-step RK4 over a sparse generator.

The inner loop (CSR mat-vec plus the RK4 stage updates) dominates the
runtime of every stepping simulation, so it is compiled with numba when
available.  Setting the environment variable SPINCHAIN_DISABLE_NUMBA=1
(or any non-"0" value) before import selects the pure numpy/scipy path
instead; both paths perform the identical floating-point operations in
the identical order.  benchmarks/bench_kernels.py compares the two.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

NUMBA_DISABLED = os.environ.get("SPINCHAIN_DISABLE_NUMBA", "0").strip() not in ("", "0")
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED

# prange regions pay a scheduling cost per call; below this dimension the
# serial kernel wins.
PARALLEL_MIN_DIM = 4096


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def num_threads() -> int:
    if USE_NUMBA:
        return numba.get_num_threads()
    return 1


if HAVE_NUMBA:

    @njit(cache=True)
    def _rk4_steps_serial(data, indices, indptr, y, h, n_steps,
                          k1, k2, k3, k4, tmp):
        n = y.shape[0]
        for _ in range(n_steps):
            for i in range(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * y[indices[jj]]
                k1[i] = acc
            for i in range(n):
                tmp[i] = y[i] + 0.5 * h * k1[i]
            for i in range(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * tmp[indices[jj]]
                k2[i] = acc
            for i in range(n):
                tmp[i] = y[i] + 0.5 * h * k2[i]
            for i in range(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * tmp[indices[jj]]
                k3[i] = acc
            for i in range(n):
                tmp[i] = y[i] + h * k3[i]
            for i in range(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * tmp[indices[jj]]
                k4[i] = acc
            for i in range(n):
                y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

    @njit(cache=True, parallel=True)
    def _rk4_steps_parallel(data, indices, indptr, y, h, n_steps,
                            k1, k2, k3, k4, tmp):
        n = y.shape[0]
        for _ in range(n_steps):
            for i in prange(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * y[indices[jj]]
                k1[i] = acc
            for i in prange(n):
                tmp[i] = y[i] + 0.5 * h * k1[i]
            for i in prange(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * tmp[indices[jj]]
                k2[i] = acc
            for i in prange(n):
                tmp[i] = y[i] + 0.5 * h * k2[i]
            for i in prange(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * tmp[indices[jj]]
                k3[i] = acc
            for i in prange(n):
                tmp[i] = y[i] + h * k3[i]
            for i in prange(n):
                acc = 0.0 + 0.0j
                for jj in range(indptr[i], indptr[i + 1]):
                    acc += data[jj] * tmp[indices[jj]]
                k4[i] = acc
            for i in prange(n):
                y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def rk4_steps_numpy(matrix: sp.csr_matrix, y: np.ndarray, h: float, n_steps: int) -> np.ndarray:
    """Reference RK4 loop on scipy's CSR mat-vec.  Advances y in place."""
    for _ in range(n_steps):
        k1 = matrix @ y
        k2 = matrix @ (y + (0.5 * h) * k1)
        k3 = matrix @ (y + (0.5 * h) * k2)
        k4 = matrix @ (y + h * k3)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def rk4_steps_numba(matrix: sp.csr_matrix, y: np.ndarray, h: float, n_steps: int) -> np.ndarray:
    """Numba RK4 loop over the CSR arrays.  Advances y in place."""
    if not HAVE_NUMBA:  # pragma: no cover
        raise RuntimeError("numba is not available")
    n = y.shape[0]
    work = [np.empty(n, dtype=np.complex128) for _ in range(5)]
    fn = _rk4_steps_parallel if n >= PARALLEL_MIN_DIM else _rk4_steps_serial
    fn(matrix.data, matrix.indices, matrix.indptr, y, h, n_steps, *work)
    return y


def rk4_propagate(matrix: sp.csr_matrix, y: np.ndarray, h: float, n_steps: int,
                  use_numba: bool | None = None) -> np.ndarray:
    """Advance dy/dt = matrix @ y by n_steps RK4 steps of size h, in place.

    use_numba overrides the module default (None = follow USE_NUMBA).
    """
    matrix = matrix.tocsr()
    if matrix.dtype != np.complex128:
        matrix = matrix.astype(np.complex128)
    if y.dtype != np.complex128:
        raise TypeError(f"state vector must be complex128, got {y.dtype}")
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return rk4_steps_numba(matrix, y, h, n_steps)
    return rk4_steps_numpy(matrix, y, h, n_steps)
