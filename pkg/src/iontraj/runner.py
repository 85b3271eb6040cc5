"""Execute a scenario: build, evolve and/or generate, analyze, write artifacts."""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from threadpoolctl import threadpool_limits

from . import analytic as an
from .analysis import AnalysisError, closure_metric, compare, dominant_frequencies, rationalize
from .config import AnalyticOverlay, ScenarioConfig
from .dynamics import TrajectoryRecord, evolve
from .hilbert import HilbertLayout
from .io import write_csv, write_svg
from .models import bounded_blocks, build, momentum_form
from .states import product

GENERATORS = {
    "8ab": an.traj_eq8ab,
    "9": an.traj_eq9,
    "12": an.traj_eq12,
}


@dataclass
class RunResult:
    config: ScenarioConfig
    record: TrajectoryRecord | None
    curve: an.Curve | None
    summary: dict[str, Any]
    files: list[Path] = field(default_factory=list)


def layout_for(config: ScenarioConfig) -> HilbertLayout:
    return HilbertLayout.standard(dict(config.dims), spins=type(config.model).spins)


def simulate(config: ScenarioConfig) -> TrajectoryRecord:
    """Numeric evolution of the scenario's model from its initial product state."""
    layout = layout_for(config)
    state = product(dict(config.initial), layout)
    ev = config.evolution
    if ev.method == "momentum":
        H = momentum_form(config.model, layout)
        if H is None:
            raise ValueError(f"model {config.model.kind!r} has no momentum-diagonal form")
    else:
        H = build(config.model, layout)
    return evolve(H, state, ev, bounds=bounded_blocks(config.model))


def generate(overlay: AnalyticOverlay) -> an.Curve:
    tau = overlay.grid()
    if overlay.equation == "8":
        return an.traj_eq8(overlay.params, tau, frequency=overlay.frequency)
    return GENERATORS[overlay.equation](overlay.params, tau)


def curve_record(curve: an.Curve) -> TrajectoryRecord:
    """Analytic curve in record form; columns other than tau, x, y are NaN."""
    n = len(curve.tau)
    nan = np.full(n, math.nan)
    cols = {name: nan for name in TrajectoryRecord.__dataclass_fields__ if name not in ("extra", "final")}
    cols.update(tau=np.asarray(curve.tau, float), x=np.asarray(curve.x, float), y=np.asarray(curve.y, float))
    return TrajectoryRecord(**cols)


def frequency_summary(rec, units_hz: float | None = None, n_peaks: int = 2) -> dict[str, Any]:
    """Dominant lines of x and y, their ratio and the closure of the implied period."""
    out: dict[str, Any] = {}
    peaks = {}
    for axis in ("x", "y"):
        vals = rec.column(axis) if hasattr(rec, "column") else getattr(rec, axis)
        if len(vals) < 64 or not np.all(np.isfinite(vals)):
            continue
        try:
            peaks[axis] = dominant_frequencies(rec, axis, n_peaks)
        except AnalysisError:
            continue
        out[f"freq_{axis}"] = [p.frequency for p in peaks[axis]]
        if units_hz and peaks[axis]:
            out[f"freq_{axis}_hz"] = [2 * math.pi * p.frequency * units_hz for p in peaks[axis]]
    if peaks.get("x") and peaks.get("y"):
        fx, fy = peaks["x"][0].frequency, peaks["y"][0].frequency
        ratio = max(fx, fy) / min(fx, fy)
        p, q, err = rationalize(ratio, 20)
        out["ratio"] = ratio
        out["ratio_pq"] = [p, q]
        out["ratio_error"] = err
        period = q / min(fx, fy)
        tau = rec.column("tau") if hasattr(rec, "column") else rec.tau
        if tau[-1] - tau[0] >= period:
            out["closure_period"] = period
            out["closure"] = closure_metric(rec, period)
    return out


def summarize(record: TrajectoryRecord | None, curve: an.Curve | None,
              config: ScenarioConfig) -> dict[str, Any]:
    s: dict[str, Any] = {"name": config.name}
    hz = config.units.eta_omega_hz
    if record is not None:
        s["final_trace"] = float(record.trace[-1])
        s["trace_drift"] = float(np.max(np.abs(record.trace - record.trace[0])))
        if np.any(np.isfinite(record.leakage)):
            s["leakage_max"] = float(np.nanmax(record.leakage))
        e = record.energy
        if np.all(np.isfinite(e)):
            s["energy_drift"] = float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1.0))
        s.update(frequency_summary(record, hz))
    if curve is not None:
        crec = curve_record(curve)
        if record is None:
            s.update(frequency_summary(crec, hz))
        else:
            rep = compare(record, crec, ("x", "y"))
            s["analytic_rms"] = rep.rms
            s["analytic_correlation"] = rep.correlation
    return s


@contextlib.contextmanager
def deterministic_mode(enabled: bool = True):
    """Single-threaded BLAS so reductions run in a fixed order."""
    if not enabled:
        yield
        return
    with threadpool_limits(limits=1):
        yield


def run(config: ScenarioConfig, out_dir=None, deterministic: bool = False) -> RunResult:
    with deterministic_mode(deterministic):
        record = simulate(config) if config.model is not None else None
        curve = generate(config.analytic) if config.analytic is not None else None
    summary = summarize(record, curve, config)
    result = RunResult(config, record, curve, summary)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        main = record if record is not None else curve_record(curve)
        o = config.outputs
        if o.csv:
            result.files.append(write_csv(main, out / o.csv, every=o.sample_every))
            if record is not None and curve is not None:
                stem = Path(o.csv)
                result.files.append(
                    write_csv(curve_record(curve), out / f"{stem.stem}.analytic{stem.suffix}", every=o.sample_every)
                )
        if o.svg:
            # one-mode scenarios have no y; draw x against tau instead
            xs, ys = (main.x, main.y) if np.any(np.isfinite(main.y)) else (main.tau, main.x)
            result.files.append(write_svg(xs, ys, out / o.svg))
    return result
