"""Analysis configuration: one JSON document describing window, shifts,
system, horizon, tolerances and output paths."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .shifts import ShiftSystem, make_shifts
from .timescale import TimeScaleWindow, make_window
from .transition import MatrixFunction, VectorFunction

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES = {
    "quadrature": 1e-10,
    "ode": 1e-10,
    "eigen": 1e-8,
    "resonance": 1e-8,
    "eps_tol": 1e-9,
    "epsilon": 0.0,
    "snap": 1e-12,
    "periodicity": 1e-8,
}


@dataclass
class AnalysisConfig:
    window: TimeScaleWindow
    shifts: ShiftSystem
    system: MatrixFunction
    forcing: VectorFunction | None
    x0: np.ndarray | None
    horizon: float
    t_max: float
    samples: int
    tolerances: dict
    report_path: Path
    samples_path: Path
    figures_dir: Path | None
    raw: dict = field(default_factory=dict)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def load_config(source, overrides: dict | None = None) -> AnalysisConfig:
    """Build a validated configuration from a path, JSON text, or dict."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    elif isinstance(source, str):
        try:
            raw = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    elif isinstance(source, dict):
        raw = source
    else:
        raise ConfigError(f"config file {source!r} not found")

    for key in ("timescale", "shifts", "system"):
        _require(key in raw, f"config is missing the {key!r} block")

    tol = dict(DEFAULT_TOLERANCES)
    tol.update(raw.get("analysis", {}).get("tolerances", {}))
    for key, val in (overrides or {}).items():
        _require(key in DEFAULT_TOLERANCES, f"unknown tolerance {key!r}")
        tol[key] = float(val)

    tsc = raw["timescale"]
    _require("kind" in tsc, "timescale block needs a 'kind'")
    try:
        if tsc["kind"] == "explicit":
            window = make_window("explicit", {"cells": tsc["cells"]},
                                 (0.0, 1.0), snap=tol["snap"])
        else:
            _require("window" in tsc, "timescale block needs a 'window' [t_min, t_max]")
            window = make_window(tsc["kind"], tsc.get("params"), tsc["window"],
                                 snap=tol["snap"])
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad timescale block: {exc}") from exc

    shc = raw["shifts"]
    for key in ("kind", "T"):
        _require(key in shc, f"shifts block needs {key!r}")
    try:
        shifts = make_shifts(shc["kind"], float(shc["T"]), shc.get("t0"),
                             shc.get("params"))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad shifts block: {exc}") from exc
    _require(shifts.t0 in window,
             f"initial point t0 = {shifts.t0} is not a point of the window")
    _require(shifts.T > shifts.t0,
             f"period T = {shifts.T} must exceed the initial point t0 = {shifts.t0}")

    sysc = raw["system"]
    _require("A" in sysc, "system block needs the matrix 'A'")
    rows = sysc["A"]
    n = int(sysc.get("n", len(rows)))
    _require(len(rows) == n and all(len(r) == n for r in rows),
             f"A must be a {n}x{n} matrix of expressions")
    params = sysc.get("params", {})
    try:
        system = MatrixFunction.from_exprs(rows, params)
    except Exception as exc:
        raise ConfigError(f"matrix entry failed to parse: {exc}") from exc

    forcing = None
    if sysc.get("F") is not None:
        _require(len(sysc["F"]) == n, f"F must have {n} components")
        try:
            forcing = VectorFunction.from_exprs(sysc["F"], params)
        except Exception as exc:
            raise ConfigError(f"forcing entry failed to parse: {exc}") from exc

    x0 = None
    if sysc.get("x0") is not None:
        _require(len(sysc["x0"]) == n, f"x0 must have {n} components")
        x0 = np.asarray(sysc["x0"], dtype=float)

    ana = raw.get("analysis", {})
    horizon = float(ana.get("horizon", shifts.t0))
    t_max = float(ana.get("t_max", window.t_max))
    samples = int(ana.get("samples", 64))
    _require(horizon >= shifts.t0, "horizon start must not precede t0")
    _require(t_max <= window.t_max + tol["snap"], "t_max must lie inside the window")
    _require(samples >= 2, "need at least two samples")

    out = raw.get("outputs", {})
    report_path = Path(out.get("report_path", "report.json"))
    samples_path = Path(out.get("samples_path", "samples.csv"))
    fig = out.get("figures_dir", "figures")
    figures_dir = Path(fig) if fig is not None else None

    return AnalysisConfig(window=window, shifts=shifts, system=system,
                          forcing=forcing, x0=x0, horizon=horizon, t_max=t_max,
                          samples=samples, tolerances=tol,
                          report_path=report_path, samples_path=samples_path,
                          figures_dir=figures_dir, raw=raw)
