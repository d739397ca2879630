"""CSV and JSON serialization of results.

Contracts (schema version "1"):

* experiment CSV: header T,C_i_j...,tau1,tau2,R,purity,trace_err with the
  pair columns in ascending (i, j) order; undefined tau1/R cells are empty.
* sweep CSV (long format): one axis column per swept axis, then
  observable,value,readout_time,convention.
* JSON mirrors the CSV arrays plus full metadata; NaN serializes as null.

Files are written atomically (temp file + rename) and contain no
timestamps, so identical inputs give bit-identical outputs.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

SCHEMA_VERSION = "1"


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.17g}"


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _de_nan(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if isinstance(obj, (np.floating,)):
        return _de_nan(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_de_nan(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {k: _de_nan(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_de_nan(v) for v in obj]
    return obj


def _dump_json(payload: dict) -> str:
    return json.dumps(_de_nan(payload), indent=2, allow_nan=False) + "\n"


def _experiment_metadata(result) -> dict:
    spec = result.spec
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "experiment",
        "chain": {
            "n_sites": spec.chain.n_sites,
            "gamma": spec.chain.gamma,
            "delta": spec.chain.delta,
            "coupling": spec.chain.coupling,
            "b_field": spec.chain.b_field,
            "boundary": spec.chain.boundary.value,
        },
        "env": {
            "coupling_strength": spec.env.coupling_strength,
            "nbar": spec.env.nbar,
            "rate_convention": spec.env.rate_convention.value,
        },
        "initial": spec.initial.value,
        "grid": {"t_max": spec.grid.t_max, "n_samples": spec.grid.n_samples},
        **result.metadata,
    }


def experiment_csv_header(result) -> list[str]:
    cols = ["T"]
    cols += [f"C_{i}_{j}" for (i, j) in result.pair_labels]
    cols += ["tau1", "tau2", "R", "purity", "trace_err"]
    return cols


def render_experiment_csv(result) -> str:
    lines = [",".join(experiment_csv_header(result))]
    n = result.times.size
    for k in range(n):
        row = [_fmt(result.times[k])]
        row += [_fmt(result.concurrences[k, c]) for c in range(len(result.pair_labels))]
        row += [_fmt(result.tau1[k]), _fmt(result.tau2[k]), _fmt(result.ratio[k]),
                _fmt(result.purity[k]), _fmt(result.trace_error[k])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_experiment_csv(result, path: str):
    _atomic_write(path, render_experiment_csv(result))


def render_experiment_json(result) -> str:
    data = {"T": result.times}
    for c, (i, j) in enumerate(result.pair_labels):
        data[f"C_{i}_{j}"] = result.concurrences[:, c]
    data.update({
        "tau1": result.tau1,
        "tau2": result.tau2,
        "R": result.ratio,
        "purity": result.purity,
        "trace_err": result.trace_error,
        "herm_err": result.herm_error,
        "min_eig": result.min_eigenvalue,
    })
    payload = {"metadata": _experiment_metadata(result), "data": data}
    return _dump_json(payload)


def write_experiment_json(result, path: str):
    _atomic_write(path, render_experiment_json(result))


def render_sweep_csv(result) -> str:
    axis_names = [axis.name for axis in result.spec.axes]
    header = axis_names + ["observable", "value", "readout_time", "convention"]
    convention = result.spec.base.env.rate_convention.value
    lines = [",".join(header)]
    for point in result.points:
        prefix = [_fmt(point.axis_values[name]) for name in axis_names]
        for obs in result.spec.observables:
            lines.append(",".join(
                prefix + [obs, _fmt(point.values[obs]),
                          _fmt(result.spec.readout_time), convention]))
    return "\n".join(lines) + "\n"


def write_sweep_csv(result, path: str):
    _atomic_write(path, render_sweep_csv(result))


def render_sweep_json(result) -> str:
    spec = result.spec
    payload = {
        "metadata": {
            "schema_version": SCHEMA_VERSION,
            "kind": "sweep",
            "axes": [{"name": a.name, "values": list(a.values)} for a in spec.axes],
            "observables": list(spec.observables),
            "chain": {
                "n_sites": spec.base.chain.n_sites,
                "gamma": spec.base.chain.gamma,
                "delta": spec.base.chain.delta,
                "coupling": spec.base.chain.coupling,
                "b_field": spec.base.chain.b_field,
                "boundary": spec.base.chain.boundary.value,
            },
            "env": {
                "coupling_strength": spec.base.env.coupling_strength,
                "nbar": spec.base.env.nbar,
                "rate_convention": spec.base.env.rate_convention.value,
            },
            **result.metadata,
        },
        "data": {
            "points": [
                {
                    "axes": point.axis_values,
                    "values": point.values,
                    "steady_check": point.steady_check,
                    "converged": point.converged,
                    "null_dim": point.null_dim,
                    "error": point.error,
                }
                for point in result.points
            ],
        },
    }
    return _dump_json(payload)


def write_sweep_json(result, path: str):
    _atomic_write(path, render_sweep_json(result))


def render_steady_csv(report: dict) -> str:
    lines = ["quantity,label,value"]
    for idx, p in enumerate(report["populations"]):
        label = format(idx, f"0{report['n_sites']}b")
        lines.append(f"population,{label},{_fmt(p)}")
    for name, value in report["concurrences"].items():
        lines.append(f"concurrence,{name},{_fmt(value)}")
    return "\n".join(lines) + "\n"


def write_steady_csv(report: dict, path: str):
    _atomic_write(path, render_steady_csv(report))


def render_steady_json(report: dict) -> str:
    payload = {
        "metadata": {"schema_version": SCHEMA_VERSION, "kind": "steady",
                     **report["metadata"]},
        "data": {k: v for k, v in report.items() if k != "metadata"},
    }
    return _dump_json(payload)


def write_steady_json(report: dict, path: str):
    _atomic_write(path, render_steady_json(report))


def events_payload(reports: dict) -> dict:
    data = {}
    for name, rep in reports.items():
        data[name] = {
            "threshold": rep.threshold,
            "rise_time": rep.rise_time,
            "death_time": rep.death_time,
            "revival_times": rep.revival_times,
            "max_value": rep.max_value,
            "max_time": rep.max_time,
            "steady_value": rep.steady_value,
            "up_crossings": rep.up_crossings,
            "down_crossings": rep.down_crossings,
        }
    return data


def render_events_csv(reports: dict) -> str:
    header = ("series,threshold,rise_time,death_time,max_value,max_time,"
              "steady_value,revival_times")
    lines = [header]
    for name, rep in reports.items():
        revivals = ";".join(_fmt(t) for t in rep.revival_times)
        cells = [name, _fmt(rep.threshold),
                 _fmt(rep.rise_time) if rep.rise_time is not None else "",
                 _fmt(rep.death_time) if rep.death_time is not None else "",
                 _fmt(rep.max_value), _fmt(rep.max_time),
                 _fmt(rep.steady_value), revivals]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_events_csv(reports: dict, path: str):
    _atomic_write(path, render_events_csv(reports))


def render_events_json(reports: dict, metadata: dict) -> str:
    payload = {
        "metadata": {"schema_version": SCHEMA_VERSION, "kind": "events", **metadata},
        "data": events_payload(reports),
    }
    return _dump_json(payload)


def write_events_json(reports: dict, metadata: dict, path: str):
    _atomic_write(path, render_events_json(reports, metadata))
