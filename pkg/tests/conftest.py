"""Shared test helpers: random states and independent brute-force oracles.

The oracles here deliberately avoid the package's own code paths: the
master-equation action is written out with dense matrix products, and the
partial trace is a direct basis-state summation.
"""

import numpy as np
import pytest


def random_pure(rng, dim):
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim, scale=1.0):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def lindblad_action(h, ops, rho):
    """-i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho}), dense."""
    h = np.asarray(h.toarray() if hasattr(h, "toarray") else h, dtype=complex)
    out = -1j * (h @ rho - rho @ h)
    for op in ops:
        l = np.asarray(op.toarray() if hasattr(op, "toarray") else op, dtype=complex)
        ldl = l.conj().T @ l
        out = out + l @ rho @ l.conj().T - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def partial_trace_loop(rho, keep, n_sites):
    """Element-by-element partial trace over computational basis states."""
    keep0 = [k - 1 for k in keep]
    traced = [i for i in range(n_sites) if i not in keep0]
    dim_k = 2 ** len(keep0)
    dim_e = 2 ** len(traced)
    out = np.zeros((dim_k, dim_k), dtype=complex)

    def full_index(kept_bits, env_bits):
        idx = 0
        for pos, site in enumerate(keep0):
            idx |= ((kept_bits >> (len(keep0) - 1 - pos)) & 1) << (n_sites - 1 - site)
        for pos, site in enumerate(traced):
            idx |= ((env_bits >> (len(traced) - 1 - pos)) & 1) << (n_sites - 1 - site)
        return idx

    for a in range(dim_k):
        for b in range(dim_k):
            for e in range(dim_e):
                out[a, b] += rho[full_index(a, e), full_index(b, e)]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
