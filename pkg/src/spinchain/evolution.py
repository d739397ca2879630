"""Propagation of the vectorized density matrix, and steady states.

Three independent integration routes are provided:

* spectral_evolve - full eigendecomposition of the generator, exact in
  time but dense, capped by default at Liouville dimension 1024.
* ode_evolve - classic fixed-step RK4 on the sparse generator; the only
  route at Liouville dimensions above the dense cap.
* unitary_evolve - for zero bath coupling, diagonalizes the Hamiltonian
  in the Q-dimensional Hilbert space instead of the Q^2 Liouville space.

All three populate per-sample state-health diagnostics (trace error,
Hermiticity error, minimum eigenvalue) and support a streaming observer
callback so large runs need not retain every density matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .liouville import Liouvillian, devectorize, vectorize

DEFAULT_T_MAX = 300.0
DEFAULT_N_SAMPLES = 3001
# RK4 phase error over T=300 at unit field stays below ~1e-7 for chains up
# to N=4 at this step; 0.01 does not survive the halving self-test.
DEFAULT_STEP = 0.002
MAX_STEP = 0.05
DENSE_DIM_CAP = 1024
CONDITION_THRESHOLD = 1e10
RECONSTRUCTION_RTOL = 1e-8
TRACE_ABORT = 1e-6
NULL_TOL = 1e-9


class EvolutionError(Exception):
    """Base class for solver failures."""


class DimensionCapError(EvolutionError):
    """Liouville dimension too large for the dense spectral path."""


class IllConditionedError(EvolutionError):
    """Eigenvector matrix too ill-conditioned to trust; use ode_evolve."""


class StepTooLargeError(EvolutionError):
    """Requested RK4 step does not resolve the fastest system scale."""


class DiagnosticBreachError(EvolutionError):
    """Trace error exceeded the abort threshold during stepping."""

    def __init__(self, time: float, trace_error: float):
        super().__init__(f"trace error {trace_error:.3e} exceeds {TRACE_ABORT:.1e} "
                         f"at T={time:g}")
        self.time = time
        self.trace_error = trace_error


class NoNullVectorError(EvolutionError):
    """No eigenvalue within tolerance of zero was found."""


class NonUniqueSteadyStateError(EvolutionError):
    """Degenerate null space; all candidate states are attached."""

    def __init__(self, states: list[np.ndarray], eigenvalues: np.ndarray):
        super().__init__(f"steady state is not unique: null space dimension "
                         f"{len(states)}")
        self.states = states
        self.eigenvalues = eigenvalues


@dataclass(frozen=True)
class TimeGrid:
    """Monotone sample times starting at 0 and ending at t_max."""

    t_max: float
    n_samples: int
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size != self.n_samples or s.size < 1:
            raise ValueError("samples must be a 1-D array of length n_samples")
        if s[0] != 0.0:
            raise ValueError(f"first sample must be 0, got {s[0]}")
        if s[-1] != self.t_max:
            raise ValueError(f"last sample must equal t_max={self.t_max}, got {s[-1]}")
        if s.size > 1 and not np.all(np.diff(s) > 0):
            raise ValueError("samples must be strictly increasing")

    @classmethod
    def uniform(cls, t_max: float = DEFAULT_T_MAX,
                n_samples: int = DEFAULT_N_SAMPLES) -> "TimeGrid":
        if t_max <= 0:
            raise ValueError(f"t_max must be > 0, got {t_max}")
        if n_samples < 2:
            raise ValueError(f"need at least 2 samples, got {n_samples}")
        samples = np.linspace(0.0, t_max, n_samples)
        samples[-1] = t_max
        return cls(t_max=t_max, n_samples=n_samples, samples=samples)


@dataclass
class Trajectory:
    """Sampled evolution with per-sample state-health diagnostics.

    states is None when the run was streamed through an observer only.
    """

    grid: TimeGrid
    states: list[np.ndarray] | None
    trace_error: np.ndarray
    herm_error: np.ndarray
    min_eigenvalue: np.ndarray
    final_state: np.ndarray


@dataclass
class SpectralDecomposition:
    """Eigendecomposition of the generator plus initial-state coefficients."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    coefficients: np.ndarray
    condition_estimate: float


def state_diagnostics(rho: np.ndarray) -> tuple[float, float, float]:
    """(trace error, max Hermiticity deviation, minimum eigenvalue)."""
    tr_err = abs(np.trace(rho) - 1.0)
    herm = np.max(np.abs(rho - rho.conj().T))
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    return float(tr_err), float(herm), min_eig


class _TrajectoryRecorder:
    def __init__(self, grid: TimeGrid, store_states: bool, observer):
        self.grid = grid
        self.store = store_states
        self.observer = observer
        n = grid.n_samples
        self.states: list[np.ndarray] | None = [] if store_states else None
        self.trace_error = np.empty(n)
        self.herm_error = np.empty(n)
        self.min_eigenvalue = np.empty(n)
        self.last = None

    def record(self, idx: int, t: float, rho: np.ndarray):
        tr, he, me = state_diagnostics(rho)
        self.trace_error[idx] = tr
        self.herm_error[idx] = he
        self.min_eigenvalue[idx] = me
        if self.states is not None:
            self.states.append(rho)
        if self.observer is not None:
            self.observer(idx, t, rho)
        self.last = rho
        return tr

    def finish(self) -> Trajectory:
        return Trajectory(grid=self.grid, states=self.states,
                          trace_error=self.trace_error,
                          herm_error=self.herm_error,
                          min_eigenvalue=self.min_eigenvalue,
                          final_state=self.last)


def spectral_decompose(gen: Liouvillian, rho0: np.ndarray,
                       max_dense_dim: int = DENSE_DIM_CAP) -> SpectralDecomposition:
    """Diagonalize the generator and solve for the mode coefficients.

    Raises DimensionCapError above max_dense_dim and IllConditionedError
    when the eigenvector matrix cannot reproduce the initial state.
    """
    if gen.dim > max_dense_dim:
        raise DimensionCapError(
            f"Liouville dimension {gen.dim} exceeds dense cap {max_dense_dim}")
    dense = gen.to_dense()
    eigenvalues, eigenvectors = np.linalg.eig(dense)
    cond = float(np.linalg.cond(eigenvectors))
    if not np.isfinite(cond) or cond > CONDITION_THRESHOLD:
        raise IllConditionedError(
            f"eigenvector condition estimate {cond:.3e} exceeds "
            f"{CONDITION_THRESHOLD:.1e}")
    v0 = vectorize(rho0)
    coefficients = np.linalg.solve(eigenvectors, v0)
    recon = eigenvectors @ coefficients
    rel = np.linalg.norm(recon - v0) / max(np.linalg.norm(v0), 1e-300)
    if rel > RECONSTRUCTION_RTOL:
        raise IllConditionedError(
            f"initial-state reconstruction error {rel:.3e} exceeds "
            f"{RECONSTRUCTION_RTOL:.1e}")
    return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors,
                                 coefficients=coefficients, condition_estimate=cond)


def spectral_evolve(gen: Liouvillian, rho0: np.ndarray, grid: TimeGrid,
                    *, store_states: bool = True, observer=None,
                    max_dense_dim: int = DENSE_DIM_CAP) -> Trajectory:
    """Propagate by summing eigenmodes: vec rho(t) = sum_i A_i eta_i e^(l_i t)."""
    dec = spectral_decompose(gen, rho0, max_dense_dim=max_dense_dim)
    q = gen.hilbert_dim
    rec = _TrajectoryRecorder(grid, store_states, observer)
    block = 256
    idx = 0
    for start in range(0, grid.n_samples, block):
        ts = grid.samples[start:start + block]
        modes = dec.coefficients[:, None] * np.exp(np.outer(dec.eigenvalues, ts))
        vecs = dec.eigenvectors @ modes
        for j in range(ts.size):
            rho = vecs[:, j].reshape(q, q).copy()
            rec.record(idx, ts[j], rho)
            idx += 1
    return rec.finish()


def evaluate_at(dec: SpectralDecomposition, t: float, hilbert_dim: int) -> np.ndarray:
    """Single-time state from an existing decomposition."""
    vec = dec.eigenvectors @ (dec.coefficients * np.exp(dec.eigenvalues * t))
    return vec.reshape(hilbert_dim, hilbert_dim)


def ode_evolve(gen: Liouvillian, rho0: np.ndarray, grid: TimeGrid,
               step: float = DEFAULT_STEP, *, store_states: bool = True,
               observer=None, use_numba: bool | None = None) -> Trajectory:
    """Fixed-step RK4 integration of the vectorized master equation.

    The step is shrunk per sample interval so that samples are hit
    exactly.  Aborts with DiagnosticBreachError if the trace drifts by
    more than 1e-6 at any sample.
    """
    if step > MAX_STEP:
        raise StepTooLargeError(f"step {step} exceeds {MAX_STEP} (unit field period)")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    matrix = gen.total.tocsr().astype(np.complex128)
    v = vectorize(rho0).astype(np.complex128, copy=True)
    q = gen.hilbert_dim
    rec = _TrajectoryRecorder(grid, store_states, observer)

    def check(idx, t, rho):
        tr = rec.record(idx, t, rho)
        if tr > TRACE_ABORT:
            raise DiagnosticBreachError(t, tr)

    check(0, grid.samples[0], v.reshape(q, q).copy())
    for i in range(1, grid.n_samples):
        dt = grid.samples[i] - grid.samples[i - 1]
        n_sub = max(1, math.ceil(dt / step - 1e-12))
        kernels.rk4_propagate(matrix, v, dt / n_sub, n_sub, use_numba=use_numba)
        check(i, grid.samples[i], v.reshape(q, q).copy())
    return rec.finish()


def unitary_evolve(hamiltonian, psi0: np.ndarray, grid: TimeGrid,
                   *, store_states: bool = True, observer=None) -> Trajectory:
    """Closed-system fast path: psi(t) = e^(-iHt) psi0 via eigh of H."""
    h = hamiltonian.toarray() if sp.issparse(hamiltonian) else np.asarray(hamiltonian)
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must have unit norm")
    energies, basis = np.linalg.eigh(h)
    c0 = basis.conj().T @ psi0
    rec = _TrajectoryRecorder(grid, store_states, observer)
    for i, t in enumerate(grid.samples):
        psi = basis @ (np.exp(-1.0j * energies * t) * c0)
        rec.record(i, t, np.outer(psi, psi.conj()))
    return rec.finish()


def _states_from_null_vectors(vectors: list[np.ndarray]) -> list[np.ndarray]:
    states = []
    for vec in vectors:
        rho = devectorize(vec)
        rho = 0.5 * (rho + rho.conj().T)
        tr = np.trace(rho).real
        if abs(tr) > 1e-10:
            rho = rho / tr
        states.append(rho)
    return states


def steady_from_eigensystem(eigenvalues: np.ndarray, eigenvectors: np.ndarray,
                            tol: float = NULL_TOL) -> tuple[np.ndarray, int]:
    """Steady state from an eigensystem of the generator.

    Returns (state, null_dimension); raises NonUniqueSteadyStateError when
    the null space dimension exceeds 1 (all candidates attached) and
    NoNullVectorError when no eigenvalue lies within tol of zero.
    """
    mags = np.abs(eigenvalues)
    null_idx = np.flatnonzero(mags <= tol)
    if null_idx.size == 0:
        raise NoNullVectorError(
            f"smallest |eigenvalue| {mags.min():.3e} exceeds tolerance {tol:.1e}")
    if null_idx.size > 1:
        states = _states_from_null_vectors([eigenvectors[:, i] for i in null_idx])
        raise NonUniqueSteadyStateError(states, eigenvalues[null_idx])
    i = int(null_idx[0])
    rho = _states_from_null_vectors([eigenvectors[:, i]])[0]
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-6:
        raise NoNullVectorError("null vector is (numerically) traceless; the "
                                "steady space is likely degenerate")
    return rho, 1


def steady_state(gen: Liouvillian, *, tol: float = NULL_TOL,
                 max_dense_dim: int = DENSE_DIM_CAP, k: int = 4) -> np.ndarray:
    """Null vector of the generator, Hermitized and trace-normalized.

    Dense eigendecomposition up to max_dense_dim; shift-inverted ARPACK
    beyond.  Requires a dissipative generator (otherwise the null space is
    massively degenerate and the notion is meaningless here).
    """
    if not gen.has_dissipator:
        raise ValueError("steady_state requires a dissipative generator "
                         "(bath coupling > 0)")
    if gen.dim <= max_dense_dim:
        eigenvalues, eigenvectors = np.linalg.eig(gen.to_dense())
    else:
        try:
            eigenvalues, eigenvectors = spla.eigs(
                gen.total.tocsc(), k=k, sigma=10 * tol, which="LM")
        except Exception as exc:  # ARPACK failures surface as several types
            raise NoNullVectorError(f"sparse eigensolver failed: {exc}") from exc
    rho, _ = steady_from_eigensystem(eigenvalues, eigenvectors, tol=tol)
    return rho
