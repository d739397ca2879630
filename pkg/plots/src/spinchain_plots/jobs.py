"""Plot job descriptions, loaded from JSON files.

A job file names an input table (CSV or JSON produced by the simulator),
what to draw, and the output basename; PNG and SVG are always emitted.

    {
      "kind": "timeseries",            # or "surface" / "contour"
      "input": "run.csv",
      "output": "figure",              # -> figure.png + figure.svg
      "columns": ["C_1_2", "C_1_3"],   # timeseries selection
      "inset": {"t_max": 5.0},         # optional zoom panel
      "observable": "C_1_2",           # surface/contour selection
      "title": "optional title"
    }

Relative input/output paths are resolved against the job file's directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

KINDS = ("timeseries", "surface", "contour")


@dataclass(frozen=True)
class InsetSpec:
    t_min: float = 0.0
    t_max: float = float("inf")
    columns: tuple[str, ...] | None = None


@dataclass(frozen=True)
class PlotJob:
    kind: str
    input_path: str
    output_path: str
    columns: tuple[str, ...] = ()
    observable: str | None = None
    inset: InsetSpec | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "timeseries" and not self.columns:
            raise ValueError("timeseries jobs need a non-empty 'columns' list")
        if self.kind in ("surface", "contour") and not self.observable:
            raise ValueError(f"{self.kind} jobs need an 'observable'")


def load_job(path: str) -> PlotJob:
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    inset = None
    if raw.get("inset") is not None:
        spec = raw["inset"]
        inset = InsetSpec(t_min=float(spec.get("t_min", 0.0)),
                          t_max=float(spec.get("t_max", float("inf"))),
                          columns=tuple(spec["columns"]) if spec.get("columns")
                          else None)
    try:
        return PlotJob(kind=raw["kind"],
                       input_path=resolve(raw["input"]),
                       output_path=resolve(raw["output"]),
                       columns=tuple(raw.get("columns", ())),
                       observable=raw.get("observable"),
                       inset=inset,
                       title=raw.get("title"))
    except KeyError as exc:
        raise ValueError(f"job file {path} is missing key {exc}") from exc
