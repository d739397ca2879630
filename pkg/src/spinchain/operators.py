"""Hilbert-space building blocks for a spin-1/2 XYZ chain in a thermal bath.

Basis convention (fixed for the whole package): product basis of N qubits
with site 1 as the most significant bit, |up> = 0 and |down> = 1.  The
basis index of |s_1 s_2 ... s_N> is therefore sum_i s_i * 2^(N-i), so
index 0 is the fully polarized state |up...up> and index 2^N - 1 is
|down...down>.  All operators returned by this module are scipy CSR
matrices in that basis; states are plain complex vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

MAX_SITES = 8

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

S_X = 0.5 * SIGMA_X
S_Y = 0.5 * SIGMA_Y
S_Z = 0.5 * SIGMA_Z
S_PLUS = S_X + 1.0j * S_Y    # |up><down|
S_MINUS = S_X - 1.0j * S_Y   # |down><up|


class Boundary(Enum):
    CLOSED = "closed"
    OPEN = "open"


class RateConvention(Enum):
    """How the bath coupling g enters the jump operator g*[(n+1)/2 S- + n S+].

    LITERAL uses g = coupling_strength itself, so effective transition
    rates scale with its square (decay rate g^2 (nbar+1)^2 / 4).
    SQRT_RATE uses g = sqrt(coupling_strength), making rates linear in the
    coupling (decay rate coupling/4 at nbar=0).  CALIBRATED uses
    g = 2 sqrt(coupling_strength), so the zero-temperature decay rate is
    exactly the coupling constant; that is the only member of this family
    whose relaxation timescale matches reference results at coupling 0.05.
    The thermal balance between decay and excitation is identical in all
    three.  Results always record which convention was used.
    """

    LITERAL = "literal"
    SQRT_RATE = "sqrt-rate"
    CALIBRATED = "calibrated"


class StateKind(Enum):
    SEPARABLE = "separable"
    W = "w"
    BELL_PAIR = "bellpair"


@dataclass(frozen=True)
class ChainParams:
    """Physical description of the chain.

    Attributes:
        n_sites: number of spins N, 2 <= N <= 8.
        gamma: x-y anisotropy in [0, 1] (1 = Ising, 0 = XX).
        delta: z anisotropy in [0, 1], scales the z-z coupling.
        coupling: nearest-neighbor exchange J >= 0, in units of the field.
        b_field: magnetic field B^z > 0 along z; sets the unit of energy.
        boundary: CLOSED wraps bond N back to site 1, OPEN does not.
    """

    n_sites: int
    gamma: float
    delta: float
    coupling: float
    b_field: float = 1.0
    boundary: Boundary = Boundary.CLOSED

    def __post_init__(self):
        if not 2 <= self.n_sites <= MAX_SITES:
            raise ValueError(f"n_sites must be in [2, {MAX_SITES}], got {self.n_sites}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")
        if self.coupling < 0.0:
            raise ValueError(f"coupling must be >= 0, got {self.coupling}")
        if self.b_field <= 0.0:
            raise ValueError(f"b_field must be > 0, got {self.b_field}")

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites


@dataclass(frozen=True)
class EnvParams:
    """Site-local thermal environment.

    Attributes:
        coupling_strength: bath coupling, >= 0; zero switches the bath off.
        nbar: dimensionless thermal occupation, >= 0 (0 = zero temperature).
        rate_convention: see RateConvention.
    """

    coupling_strength: float
    nbar: float = 0.0
    rate_convention: RateConvention = RateConvention.LITERAL

    def __post_init__(self):
        if self.coupling_strength < 0.0:
            raise ValueError(f"coupling_strength must be >= 0, got {self.coupling_strength}")
        if self.nbar < 0.0:
            raise ValueError(f"nbar must be >= 0, got {self.nbar}")

    def jump_amplitude(self) -> float:
        """Prefactor g of the per-site jump operator under this convention."""
        if self.rate_convention is RateConvention.LITERAL:
            return self.coupling_strength
        if self.rate_convention is RateConvention.SQRT_RATE:
            return float(np.sqrt(self.coupling_strength))
        return float(2.0 * np.sqrt(self.coupling_strength))


def embed_site_operator(local: np.ndarray, site: int, n_sites: int) -> sp.csr_matrix:
    """Embed a 2x2 operator acting on one site into the N-site chain.

    Returns 1 x ... x local x ... x 1 with `local` in slot `site`
    (1-based, site 1 most significant).
    """
    local = np.asarray(local, dtype=complex)
    if local.shape != (2, 2):
        raise ValueError(f"local operator must be 2x2, got {local.shape}")
    if not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range 1..{n_sites}")
    op = sp.identity(2 ** (site - 1), dtype=complex, format="csr")
    op = sp.kron(op, sp.csr_matrix(local), format="csr")
    op = sp.kron(op, sp.identity(2 ** (n_sites - site), dtype=complex, format="csr"),
                 format="csr")
    return op


def build_hamiltonian(params: ChainParams) -> sp.csr_matrix:
    """Assemble the XYZ chain Hamiltonian with a uniform z field.

    H = (1+gamma)/2 J sum_i Sx_i Sx_{i+1} + (1-gamma)/2 J sum_i Sy_i Sy_{i+1}
        + delta J sum_i Sz_i Sz_{i+1} + B sum_i Sz_i

    The bond sum runs over i = 1..N with site N+1 identified with site 1
    for a closed chain, and over i = 1..N-1 for an open chain.
    """
    n = params.n_sites
    dim = params.dim
    jx = 0.5 * (1.0 + params.gamma) * params.coupling
    jy = 0.5 * (1.0 - params.gamma) * params.coupling
    jz = params.delta * params.coupling

    sx = [embed_site_operator(S_X, k, n) for k in range(1, n + 1)]
    sy = [embed_site_operator(S_Y, k, n) for k in range(1, n + 1)]
    sz = [embed_site_operator(S_Z, k, n) for k in range(1, n + 1)]

    h = sp.csr_matrix((dim, dim), dtype=complex)
    n_bonds = n if params.boundary is Boundary.CLOSED else n - 1
    for i in range(n_bonds):
        j = (i + 1) % n
        h = h + jx * (sx[i] @ sx[j]) + jy * (sy[i] @ sy[j]) + jz * (sz[i] @ sz[j])
    for i in range(n):
        h = h + params.b_field * sz[i]
    return h.tocsr()


def build_lindblad_ops(chain: ChainParams, env: EnvParams) -> list[sp.csr_matrix]:
    """One combined decay-plus-excitation jump operator per site.

    Each operator is g * [ (nbar+1)/2 * S-_k + nbar * S+_k ] with the
    prefactor g set by the rate convention (see RateConvention).  The lone
    1/2 on the decay term is deliberate; see the package notes on
    conventions.
    """
    g = env.jump_amplitude()
    local = g * ((env.nbar + 1.0) / 2.0 * S_MINUS + env.nbar * S_PLUS)
    return [embed_site_operator(local, k, chain.n_sites) for k in range(1, chain.n_sites + 1)]


def initial_state(kind: StateKind, n_sites: int) -> np.ndarray:
    """Build one of the three canonical initial states as a unit vector.

    SEPARABLE: |up up ... up>.
    W: equal superposition of the N single-up-spin states, 1/sqrt(N) each.
    BELL_PAIR: (|up down> + |down up>)/sqrt(2) on sites 1,2 and all
        remaining sites down.
    """
    if n_sites < 2:
        raise ValueError(f"need at least 2 sites, got {n_sites}")
    dim = 2 ** n_sites
    psi = np.zeros(dim, dtype=complex)
    if kind is StateKind.SEPARABLE:
        psi[0] = 1.0
    elif kind is StateKind.W:
        # single up-spin at site k: all bits set except bit (n - k)
        all_down = dim - 1
        for k in range(1, n_sites + 1):
            psi[all_down ^ (1 << (n_sites - k))] = 1.0 / np.sqrt(n_sites)
    elif kind is StateKind.BELL_PAIR:
        tail = (1 << (n_sites - 2)) - 1  # sites 3..N all down
        psi[(0b01 << (n_sites - 2)) | tail] = 1.0 / np.sqrt(2.0)  # |up down> head
        psi[(0b10 << (n_sites - 2)) | tail] = 1.0 / np.sqrt(2.0)  # |down up> head
    else:
        raise ValueError(f"unknown state kind: {kind!r}")
    return psi


def cyclic_shift(n_sites: int) -> sp.csr_matrix:
    """Permutation operator mapping site k to site k+1 (site N to site 1).

    Sends |s_1 s_2 ... s_N> to |s_N s_1 ... s_{N-1}> (bit pattern rotated
    right); a closed-chain Hamiltonian commutes with it.
    """
    dim = 2 ** n_sites
    src = np.arange(dim)
    dst = (src >> 1) | ((src & 1) << (n_sites - 1))
    data = np.ones(dim, dtype=complex)
    return sp.csr_matrix((data, (dst, src)), shape=(dim, dim))
