"""End-to-end experiment recipes, event detection, and parameter sweeps.

run_experiment evolves one fully specified chain and streams the
entanglement observables over the sample grid; run_sweep scans one or two
of (gamma, delta, nbar) and reads out selected concurrences either at a
fixed late time or from the generator's null space.  Everything here is
deterministic: identical specs produce identical results.
"""

from __future__ import annotations

import itertools
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import kernels
from .entanglement import (PURITY_PURE_THRESHOLD, TAU1_DEFINED_MIN, concurrence,
                           one_tangle, partial_trace, purity)
from .evolution import (DEFAULT_STEP, DENSE_DIM_CAP, DimensionCapError,
                        IllConditionedError, NonUniqueSteadyStateError,
                        NoNullVectorError, TimeGrid, evaluate_at, ode_evolve,
                        spectral_decompose, spectral_evolve,
                        steady_from_eigensystem, steady_state, unitary_evolve)
from .liouville import assemble_liouvillian
from .operators import (ChainParams, EnvParams, StateKind, build_hamiltonian,
                        build_lindblad_ops, initial_state)

STEADY_CHECK_TOL = 1e-3


class Solver(Enum):
    AUTO = "auto"
    SPECTRAL = "spectral"
    STEPPING = "stepping"
    UNITARY = "unitary"


def all_pairs(n_sites: int) -> tuple[tuple[int, int], ...]:
    return tuple((i, j) for i in range(1, n_sites + 1)
                 for j in range(i + 1, n_sites + 1))


def pair_name(pair: tuple[int, int]) -> str:
    return f"C_{pair[0]}_{pair[1]}"


def parse_pair_name(name: str) -> tuple[int, int]:
    """Accepts C_1_2 or C12 style labels; returns the (i, j) pair, i < j."""
    m = re.fullmatch(r"C_?(\d)_?(\d)", name.strip())
    if not m:
        raise ValueError(f"cannot parse concurrence label {name!r}")
    i, j = int(m.group(1)), int(m.group(2))
    if i == j:
        raise ValueError(f"concurrence label {name!r} repeats a site")
    return (min(i, j), max(i, j))


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one run (no hidden state, no RNG)."""

    chain: ChainParams
    env: EnvParams
    initial: StateKind
    grid: TimeGrid
    solver: Solver = Solver.AUTO
    step: float = DEFAULT_STEP
    pairs: tuple[tuple[int, int], ...] | None = None
    reference_site: int = 1
    compute_tau: bool = True
    store_states: bool = False

    def __post_init__(self):
        n = self.chain.n_sites
        if not 1 <= self.reference_site <= n:
            raise ValueError(f"reference_site {self.reference_site} out of 1..{n}")
        if self.pairs is not None:
            for (i, j) in self.pairs:
                if not (1 <= i < j <= n):
                    raise ValueError(f"invalid pair ({i}, {j}) for {n} sites")

    def effective_pairs(self) -> tuple[tuple[int, int], ...]:
        if self.pairs is None:
            return all_pairs(self.chain.n_sites)
        pairs = list(self.pairs)
        if self.compute_tau:
            ref = self.reference_site
            for j in range(1, self.chain.n_sites + 1):
                if j != ref:
                    p = (min(ref, j), max(ref, j))
                    if p not in pairs:
                        pairs.append(p)
        return tuple(sorted(set(pairs)))


def select_solver(spec: ExperimentSpec) -> Solver:
    """AUTO policy: unitary when the bath is off, spectral while the dense
    Liouville matrix is affordable, stepping beyond."""
    if spec.solver is not Solver.AUTO:
        return spec.solver
    if spec.env.coupling_strength == 0.0:
        return Solver.UNITARY
    if spec.chain.dim ** 2 <= DENSE_DIM_CAP:
        return Solver.SPECTRAL
    return Solver.STEPPING


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    solver_used: Solver
    fallback_reason: str | None
    times: np.ndarray
    pair_labels: tuple[tuple[int, int], ...]
    concurrences: np.ndarray       # (n_samples, n_pairs)
    tau1: np.ndarray               # NaN where undefined (mixed state)
    tau2: np.ndarray
    ratio: np.ndarray              # NaN where undefined
    purity: np.ndarray
    trace_error: np.ndarray
    herm_error: np.ndarray
    min_eigenvalue: np.ndarray
    final_state: np.ndarray
    states: list[np.ndarray] | None
    metadata: dict

    def series(self, label: str) -> np.ndarray:
        pair = parse_pair_name(label)
        try:
            col = self.pair_labels.index(pair)
        except ValueError:
            raise KeyError(f"pair {label} was not computed") from None
        return self.concurrences[:, col]


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    h = build_hamiltonian(spec.chain)
    psi0 = initial_state(spec.initial, spec.chain.n_sites)
    solver = select_solver(spec)
    if solver is Solver.UNITARY and spec.env.coupling_strength != 0.0:
        raise ValueError("unitary solver requires zero bath coupling")

    pairs = spec.effective_pairs()
    n = spec.grid.n_samples
    conc = np.empty((n, len(pairs)))
    tau1 = np.full(n, np.nan)
    tau2_arr = np.full(n, np.nan)
    ratio = np.full(n, np.nan)
    pur = np.empty(n)
    ref = spec.reference_site

    def observer(idx: int, t: float, rho: np.ndarray):
        for c, pair in enumerate(pairs):
            conc[idx, c] = concurrence(partial_trace(rho, list(pair)))
        p = purity(rho)
        pur[idx] = p
        if spec.compute_tau:
            t2 = 0.0
            for c, pair in enumerate(pairs):
                if ref in pair:
                    t2 += conc[idx, c] ** 2
            tau2_arr[idx] = t2
            t1 = one_tangle(partial_trace(rho, [ref]), p)
            if t1 is not None:
                tau1[idx] = t1
                if t1 > TAU1_DEFINED_MIN:
                    ratio[idx] = t2 / t1

    fallback_reason = None
    solver_used = solver
    if solver is Solver.UNITARY:
        traj = unitary_evolve(h, psi0, spec.grid,
                              store_states=spec.store_states, observer=observer)
    else:
        gen = assemble_liouvillian(h, build_lindblad_ops(spec.chain, spec.env))
        rho0 = np.outer(psi0, psi0.conj())
        if solver is Solver.SPECTRAL:
            try:
                traj = spectral_evolve(gen, rho0, spec.grid,
                                       store_states=spec.store_states,
                                       observer=observer)
            except (IllConditionedError, DimensionCapError) as exc:
                fallback_reason = f"{type(exc).__name__}: {exc}"
                solver_used = Solver.STEPPING
                traj = ode_evolve(gen, rho0, spec.grid, step=spec.step,
                                  store_states=spec.store_states, observer=observer)
        else:
            traj = ode_evolve(gen, rho0, spec.grid, step=spec.step,
                              store_states=spec.store_states, observer=observer)

    metadata = {
        "solver": solver_used.value,
        "fallback_reason": fallback_reason,
        "convention": spec.env.rate_convention.value,
        "step": spec.step if solver_used is Solver.STEPPING else None,
        "backend": kernels.backend_name(),
        "threads": kernels.num_threads(),
        "reference_site": ref,
    }
    return ExperimentResult(
        spec=spec, solver_used=solver_used, fallback_reason=fallback_reason,
        times=spec.grid.samples.copy(), pair_labels=pairs, concurrences=conc,
        tau1=tau1, tau2=tau2_arr, ratio=ratio, purity=pur,
        trace_error=traj.trace_error, herm_error=traj.herm_error,
        min_eigenvalue=traj.min_eigenvalue, final_state=traj.final_state,
        states=traj.states, metadata=metadata)


@dataclass
class EventReport:
    """Threshold-crossing summary of one concurrence time series.

    rise_time is the first upward crossing (the first sample time when the
    series already starts above threshold); death_time is the final
    downward crossing when the series ends below threshold, else None.
    Crossing times are linearly interpolated between samples.
    """

    threshold: float
    rise_time: float | None
    death_time: float | None
    revival_times: list[float]
    max_value: float
    max_time: float
    steady_value: float
    up_crossings: list[float]
    down_crossings: list[float]


def detect_events(times, values, threshold: float = 1e-3) -> EventReport:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1 or times.size == 0:
        raise ValueError("times and values must be equal-length 1-D arrays")
    above = values >= threshold
    ups: list[float] = []
    downs: list[float] = []
    for i in range(values.size - 1):
        if above[i] != above[i + 1]:
            frac = (threshold - values[i]) / (values[i + 1] - values[i])
            t = float(times[i] + frac * (times[i + 1] - times[i]))
            (ups if above[i + 1] else downs).append(t)
    if above[0]:
        rise = float(times[0])
    else:
        rise = ups[0] if ups else None
    death = downs[-1] if downs and not above[-1] else None
    revivals = [u for u in ups if downs and u > downs[0]]
    imax = int(np.argmax(values))
    return EventReport(threshold=threshold, rise_time=rise, death_time=death,
                       revival_times=revivals, max_value=float(values[imax]),
                       max_time=float(times[imax]),
                       steady_value=float(values[-1]),
                       up_crossings=ups, down_crossings=downs)


class ReadoutMethod(Enum):
    AT_TMAX = "tmax"
    NULLSPACE = "nullspace"


AXIS_NAMES = ("gamma", "delta", "nbar")


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"axis must be one of {AXIS_NAMES}, got {self.name!r}")
        if len(self.values) < 2:
            raise ValueError(f"axis {self.name} needs at least 2 grid points")

    @classmethod
    def linear(cls, name: str, start: float, stop: float, num: int) -> "SweepAxis":
        return cls(name=name, values=tuple(np.linspace(start, stop, num)))


@dataclass(frozen=True)
class SweepSpec:
    base: ExperimentSpec
    axes: tuple[SweepAxis, ...]
    observables: tuple[str, ...] = ("C_1_2", "C_1_3", "C_1_4", "C_1_5")
    readout: ReadoutMethod = ReadoutMethod.AT_TMAX
    readout_time: float = 300.0

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("sweeps support one or two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate sweep axes: {names}")
        n = self.base.chain.n_sites
        for obs in self.observables:
            i, j = parse_pair_name(obs)
            if j > n:
                raise ValueError(f"observable {obs} needs site {j} but chain has {n}")
        if self.readout_time <= 0:
            raise ValueError("readout_time must be positive")


@dataclass
class SweepPoint:
    axis_values: dict[str, float]
    values: dict[str, float]
    steady_check: dict[str, float] | None
    converged: dict[str, bool] | None
    null_dim: int | None
    error: str | None


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list[SweepPoint]
    metadata: dict


def _point_params(spec: SweepSpec, axis_values: tuple[float, ...]):
    chain_kwargs: dict[str, float] = {}
    env_kwargs: dict[str, float] = {}
    for axis, value in zip(spec.axes, axis_values):
        if axis.name == "nbar":
            env_kwargs["nbar"] = value
        else:
            chain_kwargs[axis.name] = value
    chain = replace(spec.base.chain, **chain_kwargs) if chain_kwargs else spec.base.chain
    env = replace(spec.base.env, **env_kwargs) if env_kwargs else spec.base.env
    return chain, env


def _concurrences_of(rho: np.ndarray, observables) -> dict[str, float]:
    out = {}
    for obs in observables:
        pair = parse_pair_name(obs)
        out[obs] = concurrence(partial_trace(rho, list(pair)))
    return out


def run_sweep_point(spec: SweepSpec, axis_values: tuple[float, ...]) -> SweepPoint:
    """One grid point; failures are recorded, never raised."""
    named = {axis.name: float(v) for axis, v in zip(spec.axes, axis_values)}
    nan_values = {obs: float("nan") for obs in spec.observables}
    try:
        chain, env = _point_params(spec, axis_values)
        h = build_hamiltonian(chain)
        gen = assemble_liouvillian(h, build_lindblad_ops(chain, env))
        psi0 = initial_state(spec.base.initial, chain.n_sites)
        rho0 = np.outer(psi0, psi0.conj())

        if spec.readout is ReadoutMethod.NULLSPACE:
            try:
                rho_ss = steady_state(gen)
            except NonUniqueSteadyStateError as exc:
                return SweepPoint(axis_values=named, values=nan_values,
                                  steady_check=None, converged=None,
                                  null_dim=len(exc.states),
                                  error="non-unique steady state")
            return SweepPoint(axis_values=named,
                              values=_concurrences_of(rho_ss, spec.observables),
                              steady_check=None, converged=None, null_dim=1,
                              error=None)

        steady_check = None
        converged = None
        null_dim = None
        if gen.dim <= DENSE_DIM_CAP:
            try:
                dec = spectral_decompose(gen, rho0)
            except IllConditionedError:
                dec = None
        else:
            dec = None
        if dec is not None:
            rho_t = evaluate_at(dec, spec.readout_time, gen.hilbert_dim)
            values = _concurrences_of(rho_t, spec.observables)
            try:
                rho_ss, null_dim = steady_from_eigensystem(
                    dec.eigenvalues, dec.eigenvectors)
                steady_check = _concurrences_of(rho_ss, spec.observables)
                converged = {obs: abs(values[obs] - steady_check[obs]) <= STEADY_CHECK_TOL
                             for obs in spec.observables}
            except NonUniqueSteadyStateError as exc:
                null_dim = len(exc.states)
            except NoNullVectorError:
                null_dim = 0
        else:
            grid = TimeGrid.uniform(spec.readout_time, 2)
            traj = ode_evolve(gen, rho0, grid, step=spec.base.step,
                              store_states=False)
            values = _concurrences_of(traj.final_state, spec.observables)
        return SweepPoint(axis_values=named, values=values,
                          steady_check=steady_check, converged=converged,
                          null_dim=null_dim, error=None)
    except Exception as exc:
        return SweepPoint(axis_values=named, values=nan_values,
                          steady_check=None, converged=None, null_dim=None,
                          error=f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Scan the axis grid; row order follows the grid, not execution order."""
    grid = list(itertools.product(*[axis.values for axis in spec.axes]))
    if workers <= 1:
        points = [run_sweep_point(spec, values) for values in grid]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(run_sweep_point, itertools.repeat(spec), grid,
                                   chunksize=1))
    metadata = {
        "convention": spec.base.env.rate_convention.value,
        "readout": spec.readout.value,
        "readout_time": spec.readout_time,
        "initial": spec.base.initial.value,
        "backend": kernels.backend_name(),
        "threads": kernels.num_threads(),
        "n_points": len(points),
        "n_failed": sum(1 for p in points if p.error is not None),
    }
    return SweepResult(spec=spec, points=points, metadata=metadata)
