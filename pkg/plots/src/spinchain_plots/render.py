"""Rendering: time-series figures with optional inset, and sweep surfaces.

Inputs are the simulator's public table formats only:

* experiment CSV (header T,C_i_j,...,tau1,tau2,R,purity,trace_err) or the
  matching experiment JSON (carries full run metadata);
* sweep long-format CSV (axis columns, observable,value,readout_time,
  convention) or the matching sweep JSON.

Whatever run metadata the input carries (solver, rate convention) is
embedded in the figure's caption line.  Rendering is deterministic for a
fixed input; nothing is ever written back to the input files.
"""

from __future__ import annotations

import csv
import json
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams["svg.hashsalt"] = "spinchain-plots"

_SAVE_DPI = 150


class InputError(ValueError):
    pass


def _read_csv(path):
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except StopIteration:
        raise InputError(f"{path} is empty") from None
    return header, rows


def load_timeseries(path):
    """Return (times, columns dict, metadata dict) from CSV or JSON."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
        data = doc.get("data", {})
        if "T" not in data:
            raise InputError(f"{path}: no T array")
        columns = {}
        for name, values in data.items():
            columns[name] = np.array(
                [math.nan if v is None else float(v) for v in values])
        return columns.pop("T"), columns, doc.get("metadata", {})
    header, rows = _read_csv(path)
    if "T" not in header:
        raise InputError(f"{path}: no T column")
    arrays = {}
    for idx, name in enumerate(header):
        arrays[name] = np.array([float(r[idx]) if r[idx] else math.nan
                                 for r in rows])
    return arrays.pop("T"), arrays, {}


def load_sweep(path):
    """Return (axis names, rows, metadata) from a long-format sweep table."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
        meta = doc.get("metadata", {})
        axes = [a["name"] for a in meta.get("axes", [])]
        rows = []
        for point in doc.get("data", {}).get("points", []):
            for obs, value in point["values"].items():
                rows.append(({name: float(point["axes"][name]) for name in axes},
                             obs,
                             math.nan if value is None else float(value)))
        return axes, rows, meta
    header, raw_rows = _read_csv(path)
    if "observable" not in header or "value" not in header:
        raise InputError(f"{path}: not a sweep table (need observable,value)")
    axes = header[:header.index("observable")]
    obs_i = header.index("observable")
    val_i = header.index("value")
    meta = {}
    if "convention" in header:
        conv_i = header.index("convention")
        conventions = {row[conv_i] for row in raw_rows}
        meta["convention"] = ",".join(sorted(conventions))
    rows = []
    for row in raw_rows:
        axis_vals = {name: float(row[k]) for k, name in enumerate(axes)}
        value = float(row[val_i]) if row[val_i] else math.nan
        rows.append((axis_vals, row[obs_i], value))
    return axes, rows, meta


def _caption(metadata: dict, source: str) -> str:
    bits = []
    for key in ("solver", "convention", "rate_convention", "backend", "readout"):
        if key in metadata and metadata[key] is not None:
            bits.append(f"{key}={metadata[key]}")
    env = metadata.get("env")
    if isinstance(env, dict) and "rate_convention" in env:
        bits.append(f"convention={env['rate_convention']}")
    bits.append(f"source={source.rsplit('/', 1)[-1]}")
    return "  ".join(bits)


def _pretty(name: str) -> str:
    if name.startswith("C_"):
        return "C" + name[2:].replace("_", "")
    return name


def _save(fig, output_base: str) -> list[str]:
    paths = [output_base + ".png", output_base + ".svg"]
    fig.savefig(paths[0], dpi=_SAVE_DPI)
    fig.savefig(paths[1], metadata={"Date": None})
    plt.close(fig)
    return paths


def plot_timeseries(job) -> list[str]:
    """One curve per selected column, with an optional zoom inset."""
    times, columns, metadata = load_timeseries(job.input_path)
    missing = [c for c in job.columns if c not in columns]
    if missing:
        raise InputError(f"{job.input_path}: missing column(s) {missing}")
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    for name in job.columns:
        ax.plot(times, columns[name], linewidth=1.1, label=_pretty(name))
    ax.set_xlabel("T")
    ax.set_ylabel("entanglement")
    ax.legend(loc="best", fontsize=9)
    if job.title:
        ax.set_title(job.title)
    if job.inset is not None:
        sel = job.inset.columns or job.columns
        missing = [c for c in sel if c not in columns]
        if missing:
            raise InputError(f"{job.input_path}: missing inset column(s) {missing}")
        axin = ax.inset_axes([0.55, 0.5, 0.42, 0.45])
        window = (times >= job.inset.t_min) & (times <= job.inset.t_max)
        for name in sel:
            axin.plot(times[window], columns[name][window], linewidth=1.0)
        axin.set_xlabel("T", fontsize=7)
        axin.tick_params(labelsize=7)
    fig.text(0.01, 0.005, _caption(metadata, job.input_path), fontsize=7,
             color="0.35")
    fig.tight_layout(rect=(0, 0.02, 1, 1))
    return _save(fig, job.output_path)


def _pivot(axes, rows, observable):
    picked = [(av, value) for av, obs, value in rows if obs == observable]
    if not picked:
        raise InputError(f"observable {observable!r} not present in the table")
    if len(axes) == 1:
        xs = np.array([av[axes[0]] for av, _ in picked])
        vs = np.array([v for _, v in picked])
        order = np.argsort(xs)
        return xs[order], vs[order]
    xs = sorted({av[axes[0]] for av, _ in picked})
    ys = sorted({av[axes[1]] for av, _ in picked})
    grid = np.full((len(ys), len(xs)), np.nan)
    for av, value in picked:
        i = ys.index(av[axes[1]])
        j = xs.index(av[axes[0]])
        if not np.isnan(grid[i, j]):
            raise InputError("non-rectangular grid: duplicate point "
                             f"({av[axes[0]]}, {av[axes[1]]})")
        grid[i, j] = value
    if np.isnan(grid).any():
        raise InputError("non-rectangular grid: missing points")
    return np.array(xs), np.array(ys), grid


AXIS_LABELS = {"gamma": r"$\gamma$", "delta": r"$\delta$", "nbar": r"$\bar{n}$"}


def plot_surface(job) -> list[str]:
    """Heatmap/contour over two swept axes; line plot for a single axis."""
    axes, rows, metadata = load_sweep(job.input_path)
    if not 1 <= len(axes) <= 2:
        raise InputError(f"expected 1 or 2 axis columns, found {axes}")
    fig, ax = plt.subplots(figsize=(6.4, 5.0))
    if len(axes) == 1:
        xs, vs = _pivot(axes, rows, job.observable)
        ax.plot(xs, vs, marker="o", markersize=3, linewidth=1.1)
        ax.set_xlabel(AXIS_LABELS.get(axes[0], axes[0]))
        ax.set_ylabel(_pretty(job.observable))
    else:
        xs, ys, grid = _pivot(axes, rows, job.observable)
        if job.kind == "contour":
            art = ax.contourf(xs, ys, grid, levels=21, cmap="viridis")
        else:
            art = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis")
        fig.colorbar(art, ax=ax, label=_pretty(job.observable))
        ax.set_xlabel(AXIS_LABELS.get(axes[0], axes[0]))
        ax.set_ylabel(AXIS_LABELS.get(axes[1], axes[1]))
    if job.title:
        ax.set_title(job.title)
    fig.text(0.01, 0.005, _caption(metadata, job.input_path), fontsize=7,
             color="0.35")
    fig.tight_layout(rect=(0, 0.02, 1, 1))
    return _save(fig, job.output_path)


def render(job) -> list[str]:
    if job.kind == "timeseries":
        return plot_timeseries(job)
    return plot_surface(job)
