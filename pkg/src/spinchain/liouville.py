"""Vectorized density matrices and the master-equation superoperator.

A Q x Q density matrix is flattened row by row: slot (j-1)Q + l holds
rho_jl (1-based), i.e. plain C-order ravel.  Under that convention an
operator sandwich A rho B becomes (A kron B^T) acting on the vector, so
the two generator pieces are

    unitary:     -i (H kron 1 - 1 kron H^T)
    dissipative: sum_k [ L_k kron conj(L_k)
                         - 1/2 (L_k^dag L_k) kron 1
                         - 1/2 1 kron (L_k^dag L_k)^T ]

The element-wise four-index forms are exposed separately (without the
overall -i) by assemble_hamiltonian_superop / assemble_dissipator_superop;
assemble_liouvillian applies the -i and returns the full generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


def vectorize(rho: np.ndarray) -> np.ndarray:
    """Flatten a square matrix into a row-major Liouville vector."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    return np.ravel(rho, order="C").astype(complex, copy=False)

def devectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of vectorize; fails if the length is not a perfect square."""
    vec = np.asarray(vec)
    if vec.ndim != 1:
        raise ValueError(f"expected a vector, got shape {vec.shape}")
    q = np.sqrt(vec.size)
    if q != int(q):
        raise ValueError(f"length {vec.size} is not a perfect square")
    q = int(q)
    return vec.reshape(q, q)


def assemble_hamiltonian_superop(h: sp.spmatrix | np.ndarray) -> sp.csr_matrix:
    """Four-index commutator matrix: entries H_jm d_ln - d_jm H_nl.

    The generator of unitary flow is -i times this.
    """
    h = sp.csr_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got {h.shape}")
    ident = sp.identity(h.shape[0], dtype=complex, format="csr")
    return (sp.kron(h, ident, format="csr")
            - sp.kron(ident, h.T, format="csr"))


def assemble_dissipator_superop(lindblad_ops, dim: int | None = None) -> sp.csr_matrix:
    """Four-index dissipator matrix, including its i/2 prefactor.

    Multiplying by the generator's overall -i yields the standard
    contractive action sum_k [L rho L^dag - 1/2 {L^dag L, rho}].  An empty
    operator list yields the zero superoperator (dim must then be given).
    """
    ops = [sp.csr_matrix(op) for op in lindblad_ops]
    if not ops:
        if dim is None:
            raise ValueError("empty operator list needs an explicit Hilbert dimension")
        return zero_dissipator(dim)
    dim = ops[0].shape[0]
    for op in ops:
        if op.shape != (dim, dim):
            raise ValueError(f"operator shape {op.shape} does not match ({dim}, {dim})")
    ident = sp.identity(dim, dtype=complex, format="csr")
    total = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    for op in ops:
        ldl = (op.conj().T @ op).tocsr()
        total = total + (2.0 * sp.kron(op, op.conj(), format="csr")
                         - sp.kron(ldl, ident, format="csr")
                         - sp.kron(ident, ldl.T, format="csr"))
    return (0.5j * total).tocsr()


def zero_dissipator(dim: int) -> sp.csr_matrix:
    """Zero dissipator superoperator for a Q-dimensional Hilbert space."""
    return sp.csr_matrix((dim * dim, dim * dim), dtype=complex)


@dataclass(frozen=True)
class Liouvillian:
    """Assembled master-equation generator in Liouville space.

    hamiltonian_part and dissipative_part already carry the -i prefactor,
    so total @ vectorize(rho) is d(vec rho)/dt.
    """

    dim: int
    hamiltonian_part: sp.csr_matrix
    dissipative_part: sp.csr_matrix
    total: sp.csr_matrix

    @property
    def hilbert_dim(self) -> int:
        return int(np.sqrt(self.dim))

    @property
    def has_dissipator(self) -> bool:
        return self.dissipative_part.nnz > 0

    def to_dense(self) -> np.ndarray:
        """Dense view of the full generator (built on demand; Q^2 x Q^2)."""
        return self.total.toarray()

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Action d(rho)/dt on a density matrix, returned as a matrix."""
        return devectorize(self.total @ vectorize(rho))


def assemble_liouvillian(h, lindblad_ops) -> Liouvillian:
    """Build the full generator -i (L^H + L^D) from H and the jump operators.

    Operators that are identically zero (e.g. zero bath coupling)
    contribute nothing and leave the dissipative part empty.
    """
    h = sp.csr_matrix(h)
    q = h.shape[0]
    ops = [sp.csr_matrix(op) for op in lindblad_ops]
    ops = [op for op in ops if op.nnz > 0]
    ham_part = (-1.0j * assemble_hamiltonian_superop(h)).tocsr()
    if ops:
        diss_part = (-1.0j * assemble_dissipator_superop(ops)).tocsr()
        diss_part.eliminate_zeros()
    else:
        diss_part = zero_dissipator(q)
    total = (ham_part + diss_part).tocsr()
    return Liouvillian(dim=q * q, hamiltonian_part=ham_part,
                       dissipative_part=diss_part, total=total)


def trace_functional(hilbert_dim: int) -> np.ndarray:
    """Row vector v with v @ vec(rho) = trace(rho); left null vector of any
    trace-preserving generator."""
    vec = np.zeros(hilbert_dim * hilbert_dim, dtype=complex)
    vec[:: hilbert_dim + 1] = 1.0
    return vec
