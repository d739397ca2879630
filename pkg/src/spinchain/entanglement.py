"""Reduced density matrices and entanglement measures.

Pairwise entanglement is quantified by the two-qubit concurrence
C = max{0, e1 - e2 - e3 - e4}, where the e_i are the decreasingly
sorted eigenvalues of R = sqrt(sqrt(rho) rho_tilde sqrt(rho)) and
rho_tilde = (sy x sy) conj(rho) (sy x sy).  The e_i are computed here as
the square roots of the eigenvalues of rho @ rho_tilde (same spectrum,
one general eigensolve instead of two matrix square roots); the direct
Hermitian construction is kept as concurrence_hermitian and the two must
agree to 1e-10.

For a pure N-qubit state, the one-tangle tau1 = 4 det rho_1 measures the
entanglement of one spin with the rest; tau2 = sum_{j != i} C_ij^2 is the
aggregate pairwise share, and their ratio R = tau2/tau1 <= 1 by monogamy.
tau1 and R are undefined on mixed states and are reported as None/NaN.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PURITY_PURE_THRESHOLD = 1.0 - 1e-6
TAU1_DEFINED_MIN = 1e-12
MIN_EIG_PHYSICAL = -1e-7
EIG_CLAMP_FLOOR = -1e-10
CONCURRENCE_OVERSHOOT = 1e-7

_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_SYSY = np.kron(_SY, _SY).real  # entries are 0 and +-1


class NonPhysicalInputError(ValueError):
    """Input is too far from a valid density matrix to evaluate."""


def purity(rho: np.ndarray) -> float:
    """Tr rho^2 for a (numerically) Hermitian rho."""
    return float(np.vdot(rho, rho).real)


def _infer_sites(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2 ** n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Trace out all sites not in `keep` (1-based, sorted, unique).

    Site 1 is the most significant qubit of the basis index; the returned
    matrix is ordered by the kept sites in the given order.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got {rho.shape}")
    n = _infer_sites(rho.shape[0])
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one site")
    if keep != sorted(set(keep)) or keep[0] < 1 or keep[-1] > n:
        raise ValueError(f"keep must be sorted unique sites within 1..{n}, got {keep}")
    kept = [k - 1 for k in keep]
    traced = [i for i in range(n) if i not in kept]
    perm = kept + traced + [n + i for i in kept] + [n + i for i in traced]
    dim_k = 2 ** len(kept)
    dim_e = 2 ** len(traced)
    tensor = rho.reshape((2,) * (2 * n)).transpose(perm)
    tensor = tensor.reshape(dim_k, dim_e, dim_k, dim_e)
    return np.trace(tensor, axis1=1, axis2=3)


def _check_physical(rho: np.ndarray):
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-6:
        raise NonPhysicalInputError(f"Hermiticity deviation {herm:.3e} too large")
    min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if min_eig < MIN_EIG_PHYSICAL:
        raise NonPhysicalInputError(
            f"minimum eigenvalue {min_eig:.3e} below {MIN_EIG_PHYSICAL:.1e}")


def _combine_epsilons(eps: np.ndarray) -> float:
    eps = np.sort(eps)[::-1]
    c = eps[0] - eps[1] - eps[2] - eps[3]
    # negative raw values are the normal separable-state outcome of the
    # max{0, .} formula; only an overshoot above 1 signals trouble
    if c > 1.0 + CONCURRENCE_OVERSHOOT:
        raise NonPhysicalInputError(f"concurrence overshoot: {c!r}")
    return float(min(max(c, 0.0), 1.0))


def concurrence(rho2: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix, in [0, 1]."""
    rho2 = np.asarray(rho2, dtype=complex)
    if rho2.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit matrix, got {rho2.shape}")
    _check_physical(rho2)
    rho_tilde = _SYSY @ rho2.conj() @ _SYSY
    evals = np.linalg.eigvals(rho2 @ rho_tilde)
    if np.any(np.abs(evals.imag) > 1e-8):
        raise NonPhysicalInputError(
            f"complex eigenvalues of rho rho~: max imag {np.abs(evals.imag).max():.3e}")
    re = evals.real
    if np.any(re < EIG_CLAMP_FLOOR):
        raise NonPhysicalInputError(
            f"eigenvalue of rho rho~ at {re.min():.3e} below clamp floor")
    return _combine_epsilons(np.sqrt(np.clip(re, 0.0, None)))


def concurrence_hermitian(rho2: np.ndarray) -> float:
    """Same quantity via the explicit Hermitian R matrix (slower route)."""
    rho2 = np.asarray(rho2, dtype=complex)
    if rho2.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit matrix, got {rho2.shape}")
    _check_physical(rho2)
    rho_h = 0.5 * (rho2 + rho2.conj().T)
    w, u = np.linalg.eigh(rho_h)
    sqrt_rho = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    rho_tilde = _SYSY @ rho2.conj() @ _SYSY
    m = sqrt_rho @ rho_tilde @ sqrt_rho
    ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return _combine_epsilons(np.sqrt(np.clip(ev, 0.0, None)))


def one_tangle(rho1: np.ndarray, purity_of_full_state: float) -> float | None:
    """4 det(rho_1) for a pure full state; None when the state is mixed."""
    rho1 = np.asarray(rho1, dtype=complex)
    if rho1.shape != (2, 2):
        raise ValueError(f"expected a 2x2 single-site matrix, got {rho1.shape}")
    if purity_of_full_state < PURITY_PURE_THRESHOLD:
        return None
    val = 4.0 * np.linalg.det(rho1).real
    return float(min(max(val, 0.0), 1.0))


def tau2(rho: np.ndarray, site: int = 1) -> float:
    """Sum of squared concurrences between `site` and every other site."""
    n = _infer_sites(np.asarray(rho).shape[0])
    if not 1 <= site <= n:
        raise ValueError(f"site {site} out of range 1..{n}")
    total = 0.0
    for j in range(1, n + 1):
        if j == site:
            continue
        pair = sorted((site, j))
        total += concurrence(partial_trace(rho, pair)) ** 2
    return total


@dataclass
class EntanglementRecord:
    """All entanglement observables of one state.

    concurrence is an N x N symmetric matrix with zero diagonal.  tau1 and
    ratio are None when the state is not pure (purity below threshold);
    within ratio, entries where tau1 vanishes are NaN.
    """

    concurrence: np.ndarray
    tau1: np.ndarray | None
    tau2: np.ndarray
    ratio: np.ndarray | None
    purity: float


def entanglement_record(rho: np.ndarray,
                        pairs: Sequence[tuple[int, int]] | None = None) -> EntanglementRecord:
    """Evaluate concurrences (all pairs by default), tau1, tau2, R, purity.

    With a restricted pair list, tau2 sums over the computed pairs only.
    """
    rho = np.asarray(rho, dtype=complex)
    n = _infer_sites(rho.shape[0])
    if pairs is None:
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    conc = np.zeros((n, n))
    for (i, j) in pairs:
        c = concurrence(partial_trace(rho, [i, j]))
        conc[i - 1, j - 1] = c
        conc[j - 1, i - 1] = c
    p = purity(rho)
    t2 = np.sum(conc ** 2, axis=1)
    if p >= PURITY_PURE_THRESHOLD:
        t1 = np.empty(n)
        for k in range(1, n + 1):
            t1[k - 1] = one_tangle(partial_trace(rho, [k]), p)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(t1 > TAU1_DEFINED_MIN, t2 / t1, np.nan)
    else:
        t1 = None
        ratio = None
    return EntanglementRecord(concurrence=conc, tau1=t1, tau2=t2, ratio=ratio, purity=p)
