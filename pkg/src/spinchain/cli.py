"""Command-line interface: evolve, sweep, steady, events.

Any flag may also come from a config file (--config PATH) holding
`key = value` lines; keys are the long flag names without the leading
dashes, `#` starts a comment, and command-line flags override the file.
Exit codes: 0 success, 1 runtime failure (a JSON error record goes to
stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import output
from .entanglement import concurrence, partial_trace
from .evolution import (DEFAULT_STEP, NonUniqueSteadyStateError, TimeGrid,
                        steady_state)
from .experiments import (ExperimentSpec, ReadoutMethod, Solver, SweepAxis,
                          SweepSpec, all_pairs, detect_events, pair_name,
                          parse_pair_name, run_experiment, run_sweep)
from .kernels import backend_name, num_threads
from .liouville import assemble_liouvillian, vectorize
from .operators import (Boundary, ChainParams, EnvParams, RateConvention,
                        StateKind, build_hamiltonian, build_lindblad_ops)


class UsageError(Exception):
    pass


def _choice(name, mapping):
    def convert(text):
        key = str(text).strip().lower()
        if key not in mapping:
            raise ValueError(f"--{name}: expected one of {sorted(mapping)}, got {text!r}")
        return mapping[key]
    convert.__name__ = f"choice_{name}"
    return convert


_RATE = _choice("rate-convention", {
    "literal": RateConvention.LITERAL,
    "sqrt": RateConvention.SQRT_RATE,
    "sqrt-rate": RateConvention.SQRT_RATE,
    "calibrated": RateConvention.CALIBRATED,
})
_BOUNDARY = _choice("boundary", {"open": Boundary.OPEN, "closed": Boundary.CLOSED})
_INITIAL = _choice("initial", {
    "separable": StateKind.SEPARABLE,
    "w": StateKind.W,
    "bellpair": StateKind.BELL_PAIR,
})
_SOLVER = _choice("solver", {s.value: s for s in Solver})
_FORMAT = _choice("format", {"csv": "csv", "json": "json"})
_READOUT_METHOD = _choice("readout-method", {m.value: m for m in ReadoutMethod})


def _axis(text):
    parts = str(text).split(":")
    if len(parts) == 3:
        parts.append("41")  # default grid density
    if len(parts) != 4:
        raise ValueError(f"--axis: expected name:start:stop[:num], got {text!r}")
    name, start, stop, num = parts
    return SweepAxis.linear(name.strip(), float(start), float(stop), int(num))


# dest -> (flag, converter, default, help)
MODEL_OPTIONS = {
    "sites": ("--sites", int, 5, "number of spins N (2..8)"),
    "gamma": ("--gamma", float, 1.0, "x-y anisotropy in [0, 1]"),
    "delta": ("--delta", float, 0.0, "z anisotropy in [0, 1]"),
    "coupling": ("--coupling", float, 0.05, "exchange coupling J"),
    "field": ("--field", float, 1.0, "magnetic field B^z (energy unit)"),
    "env_gamma": ("--env-gamma", float, 0.05, "bath coupling strength"),
    "nbar": ("--nbar", float, 0.0, "thermal occupation of the bath"),
    "rate_convention": ("--rate-convention", _RATE, RateConvention.LITERAL,
                        "literal or sqrt-rate jump-operator scaling"),
    "boundary": ("--boundary", _BOUNDARY, Boundary.CLOSED, "open or closed chain"),
}

OUTPUT_OPTIONS = {
    "out": ("--out", str, None, "output path (stdout when omitted)"),
    "format": ("--format", _FORMAT, "csv", "csv or json"),
}

EVOLVE_OPTIONS = {
    **MODEL_OPTIONS,
    "initial": ("--initial", _INITIAL, StateKind.SEPARABLE,
                "separable, w, or bellpair"),
    "tmax": ("--tmax", float, 300.0, "final dimensionless time"),
    "samples": ("--samples", int, 3001, "number of output samples"),
    "solver": ("--solver", _SOLVER, Solver.AUTO,
               "auto, spectral, stepping, or unitary"),
    "step": ("--step", float, DEFAULT_STEP, "RK4 step for the stepping solver"),
    "tau_site": ("--tau-site", int, 1, "reference site for tau1/tau2/R"),
    **OUTPUT_OPTIONS,
}

STEADY_OPTIONS = {**MODEL_OPTIONS, **OUTPUT_OPTIONS}

SWEEP_OPTIONS = {
    **MODEL_OPTIONS,
    "initial": ("--initial", _INITIAL, StateKind.SEPARABLE,
                "separable, w, or bellpair"),
    "step": ("--step", float, DEFAULT_STEP, "RK4 step for stepping fallbacks"),
    "readout_method": ("--readout-method", _READOUT_METHOD, ReadoutMethod.AT_TMAX,
                       "tmax (trajectory value) or nullspace (steady state)"),
    "readout_time": ("--readout-time", float, 300.0, "readout time for tmax mode"),
    "workers": ("--workers", int, 1, "parallel worker processes"),
    **OUTPUT_OPTIONS,
}

EVENTS_OPTIONS = {
    "infile": ("--in", str, None, "evolve CSV to analyze (required)"),
    "threshold": ("--threshold", float, 1e-3, "concurrence zero threshold"),
    **OUTPUT_OPTIONS,
}

LIST_OPTIONS = {
    "axis": ("--axis", _axis, None, "sweep axis name:start:stop:num (max twice)"),
    "readout": ("--readout", str, None, "observable to read out, e.g. C12"),
    "series": ("--series", str, None, "concurrence column, e.g. C_1_3"),
}


def _add_options(parser, table, list_flags=()):
    parser.add_argument("--config", default=None, metavar="FILE",
                        help="key = value file supplying any flag")
    for dest, (flag, conv, _default, help_text) in table.items():
        parser.add_argument(flag, dest=dest, type=conv, default=None, help=help_text)
    for dest in list_flags:
        flag, conv, _default, help_text = LIST_OPTIONS[dest]
        parser.add_argument(flag, dest=dest, type=conv, action="append",
                            default=None, help=help_text)


def _load_config(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                values[key.strip().lower().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(args, table, list_flags=()):
    config = _load_config(args.config) if args.config else {}
    known = set(table) | set(list_flags)
    if args.config:
        unknown = set(config) - known
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    params = {}
    for dest, (flag, conv, default, _help) in table.items():
        value = getattr(args, dest)
        if value is None and dest in config:
            try:
                value = conv(config[dest])
            except ValueError as exc:
                raise UsageError(f"config key '{dest}': {exc}") from exc
        params[dest] = default if value is None else value
    for dest in list_flags:
        flag, conv, _default, _help = LIST_OPTIONS[dest]
        value = getattr(args, dest)
        if value is None and dest in config:
            try:
                value = [conv(item) for item in config[dest].split(",") if item.strip()]
            except ValueError as exc:
                raise UsageError(f"config key '{dest}': {exc}") from exc
        params[dest] = value
    return params


def _chain(params) -> ChainParams:
    try:
        return ChainParams(n_sites=params["sites"], gamma=params["gamma"],
                           delta=params["delta"], coupling=params["coupling"],
                           b_field=params["field"], boundary=params["boundary"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _env(params) -> EnvParams:
    try:
        return EnvParams(coupling_strength=params["env_gamma"], nbar=params["nbar"],
                         rate_convention=params["rate_convention"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(params, text, writer, path_arg):
    if path_arg:
        writer(path_arg)
    else:
        sys.stdout.write(text())


def cmd_evolve(args) -> int:
    params = _resolve(args, EVOLVE_OPTIONS)
    chain = _chain(params)
    env = _env(params)
    try:
        grid = TimeGrid.uniform(params["tmax"], params["samples"])
        spec = ExperimentSpec(chain=chain, env=env, initial=params["initial"],
                              grid=grid, solver=params["solver"],
                              step=params["step"],
                              reference_site=params["tau_site"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = run_experiment(spec)
    if params["format"] == "csv":
        _emit(params, lambda: output.render_experiment_csv(result),
              lambda p: output.write_experiment_csv(result, p), params["out"])
    else:
        _emit(params, lambda: output.render_experiment_json(result),
              lambda p: output.write_experiment_json(result, p), params["out"])
    return 0


def cmd_steady(args) -> int:
    params = _resolve(args, STEADY_OPTIONS)
    chain = _chain(params)
    env = _env(params)
    if env.coupling_strength <= 0:
        raise UsageError("--env-gamma must be > 0 for a steady state")
    gen = assemble_liouvillian(build_hamiltonian(chain),
                               build_lindblad_ops(chain, env))
    rho = steady_state(gen)
    residual = float(np.max(np.abs(gen.total @ vectorize(rho))))
    concs = {pair_name(p): concurrence(partial_trace(rho, list(p)))
             for p in all_pairs(chain.n_sites)}
    report = {
        "n_sites": chain.n_sites,
        "populations": [float(x) for x in np.real(np.diag(rho))],
        "concurrences": concs,
        "null_dim": 1,
        "residual": residual,
        "metadata": {
            "chain": {"n_sites": chain.n_sites, "gamma": chain.gamma,
                      "delta": chain.delta, "coupling": chain.coupling,
                      "b_field": chain.b_field, "boundary": chain.boundary.value},
            "env": {"coupling_strength": env.coupling_strength, "nbar": env.nbar,
                    "rate_convention": env.rate_convention.value},
            "backend": backend_name(),
            "threads": num_threads(),
        },
    }
    if params["format"] == "csv":
        _emit(params, lambda: output.render_steady_csv(report),
              lambda p: output.write_steady_csv(report, p), params["out"])
    else:
        _emit(params, lambda: output.render_steady_json(report),
              lambda p: output.write_steady_json(report, p), params["out"])
    return 0


def cmd_sweep(args) -> int:
    params = _resolve(args, SWEEP_OPTIONS, list_flags=("axis", "readout"))
    chain = _chain(params)
    env = _env(params)
    axes = params["axis"]
    if not axes:
        raise UsageError("--axis is required (name:start:stop:num)")
    if len(axes) > 2:
        raise UsageError("--axis may be given at most twice")
    observables = params["readout"]
    if observables:
        names = [pair_name(parse_pair_name(o)) for o in observables]
    else:
        names = [pair_name(p) for p in all_pairs(chain.n_sites)
                 if p in {(1, 2), (1, 3), (1, 4), (1, 5)}]
    try:
        grid = TimeGrid.uniform(params["readout_time"], 2)
        base = ExperimentSpec(chain=chain, env=env, initial=params["initial"],
                              grid=grid, step=params["step"])
        spec = SweepSpec(base=base, axes=tuple(axes), observables=tuple(names),
                         readout=params["readout_method"],
                         readout_time=params["readout_time"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    result = run_sweep(spec, workers=params["workers"])
    if params["format"] == "csv":
        _emit(params, lambda: output.render_sweep_csv(result),
              lambda p: output.write_sweep_csv(result, p), params["out"])
    else:
        _emit(params, lambda: output.render_sweep_json(result),
              lambda p: output.write_sweep_json(result, p), params["out"])
    return 0


def _read_series_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [row for row in reader if row]
    if "T" not in header:
        raise UsageError(f"{path}: no T column in header")
    columns = {name: idx for idx, name in enumerate(header)}
    data = {}
    for name, idx in columns.items():
        cells = [row[idx] for row in rows]
        data[name] = np.array([float(c) if c else np.nan for c in cells])
    return header, data


def cmd_events(args) -> int:
    params = _resolve(args, EVENTS_OPTIONS, list_flags=("series",))
    if not params["infile"]:
        raise UsageError("--in is required")
    header, data = _read_series_csv(params["infile"])
    wanted = params["series"]
    if wanted:
        names = [pair_name(parse_pair_name(s)) for s in wanted]
        missing = [n for n in names if n not in data]
        if missing:
            raise UsageError(f"column(s) not in {params['infile']}: {missing}")
    else:
        names = [n for n in header if n.startswith("C_")]
    times = data["T"]
    reports = {name: detect_events(times, data[name], params["threshold"])
               for name in names}
    metadata = {"source": params["infile"], "threshold": params["threshold"]}
    if params["format"] == "csv":
        _emit(params, lambda: output.render_events_csv(reports),
              lambda p: output.write_events_csv(reports, p), params["out"])
    else:
        _emit(params, lambda: output.render_events_json(reports, metadata),
              lambda p: output.write_events_json(reports, metadata, p), params["out"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinchain",
        description="Dissipative Heisenberg XYZ chain simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_evolve = sub.add_parser("evolve", help="time-evolve one chain")
    _add_options(p_evolve, EVOLVE_OPTIONS)
    p_evolve.set_defaults(func=cmd_evolve)

    p_steady = sub.add_parser("steady", help="steady state from the null space")
    _add_options(p_steady, STEADY_OPTIONS)
    p_steady.set_defaults(func=cmd_steady)

    p_sweep = sub.add_parser("sweep", help="scan gamma/delta/nbar grids")
    _add_options(p_sweep, SWEEP_OPTIONS, list_flags=("axis", "readout"))
    p_sweep.set_defaults(func=cmd_sweep)

    p_events = sub.add_parser("events", help="rise/death/revival detection")
    _add_options(p_events, EVENTS_OPTIONS, list_flags=("series",))
    p_events.set_defaults(func=cmd_events)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NonUniqueSteadyStateError as exc:
        record = {"error": {"type": "NonUniqueSteadyState",
                            "message": str(exc),
                            "null_dim": len(exc.states)}}
        print(json.dumps(record), file=sys.stderr)
        return 1
    except Exception as exc:
        record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
