"""Benchmark the RK4 stepping kernel: numba vs pure numpy/scipy.

Builds the full master-equation generator for a dissipative chain and
times both backends over the same number of steps.  Run:

    python benchmarks/bench_kernels.py --sites 5 6 --span 2.0
"""

import argparse
import time

import numpy as np

from spinchain import kernels
from spinchain.liouville import assemble_liouvillian, vectorize
from spinchain.operators import (Boundary, ChainParams, EnvParams, StateKind,
                                 build_hamiltonian, build_lindblad_ops,
                                 initial_state)


def build_system(n_sites):
    chain = ChainParams(n_sites=n_sites, gamma=1.0, delta=0.0, coupling=0.05,
                        boundary=Boundary.CLOSED)
    env = EnvParams(coupling_strength=0.05, nbar=0.05)
    gen = assemble_liouvillian(build_hamiltonian(chain),
                               build_lindblad_ops(chain, env))
    psi = initial_state(StateKind.SEPARABLE, n_sites)
    return gen, vectorize(np.outer(psi, psi.conj()))


def time_backend(matrix, v0, h, n_steps, use_numba, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        y = v0.astype(np.complex128, copy=True)
        start = time.perf_counter()
        kernels.rk4_propagate(matrix, y, h, n_steps, use_numba=use_numba)
        best = min(best, time.perf_counter() - start)
    return best, y


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sites", type=int, nargs="+", default=[3, 4, 5, 6])
    parser.add_argument("--step", type=float, default=0.002)
    parser.add_argument("--span", type=float, default=1.0,
                        help="time span to integrate per measurement")
    args = parser.parse_args()

    n_steps = int(round(args.span / args.step))
    print(f"RK4 stepping, {n_steps} steps of h={args.step}"
          f" (numba threads: {kernels.num_threads()})")
    print(f"{'N':>3} {'dim':>7} {'nnz':>9} {'numba [s]':>10} {'numpy [s]':>10}"
          f" {'speedup':>8} {'max|diff|':>10}")
    for n in args.sites:
        gen, v0 = build_system(n)
        matrix = gen.total.tocsr().astype(np.complex128)
        if kernels.HAVE_NUMBA:
            kernels.rk4_propagate(matrix, v0.copy(), args.step, 1, use_numba=True)
        t_numba, y_numba = time_backend(matrix, v0, args.step, n_steps, True)
        t_numpy, y_numpy = time_backend(matrix, v0, args.step, n_steps, False)
        diff = np.max(np.abs(y_numba - y_numpy))
        print(f"{n:>3} {gen.dim:>7} {matrix.nnz:>9} {t_numba:>10.3f}"
              f" {t_numpy:>10.3f} {t_numpy / t_numba:>8.2f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
