"""Command-line entry point: ``iontraj {run,preset,analyze,validate}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import AnalysisError, closure_metric, dominant_frequencies
from .config import ConfigError, dumps, load
from .dynamics import DynamicsError
from .hilbert import HilbertError
from .io import read_csv
from .presets import PRESET_NAMES, PresetError, preset
from .runner import frequency_summary, run
from .states import StateError
from .models import ModelError

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
PHYSICS_ERRORS = (ConfigError, DynamicsError, HilbertError, StateError, ModelError, AnalysisError,
                  PresetError, ValueError)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _print_summary(result) -> None:
    print(json.dumps(_jsonable(result.summary), indent=2))
    for f in result.files:
        print(f"wrote {f}")


def cmd_run(args) -> int:
    config = load(args.config)
    _print_summary(run(config, args.out, deterministic=args.deterministic))
    return EXIT_OK


def cmd_preset(args) -> int:
    config = preset(args.name)
    if args.emit_config:
        text = dumps(config)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"{config.name}.json"
            path.write_text(text + "\n", encoding="utf-8")
            print(f"wrote {path}")
        else:
            print(text)
        return EXIT_OK
    _print_summary(run(config, args.out or ".", deterministic=args.deterministic))
    return EXIT_OK


class _Columns:
    def __init__(self, cols):
        self._cols = cols
        self.tau = cols["tau"]

    def column(self, name):
        return self._cols[name]

    def __getattr__(self, name):
        try:
            return self._cols[name]
        except KeyError:
            raise AttributeError(name) from None


def cmd_analyze(args) -> int:
    cols = read_csv(args.csv)
    if "tau" not in cols:
        raise ConfigError("tau", "CSV has no tau column")
    rec = _Columns(cols)
    out = {}
    for axis in ("x", "y"):
        if axis in cols and np.all(np.isfinite(cols[axis])):
            out[f"peaks_{axis}"] = [
                {"frequency": p.frequency, "amplitude": p.amplitude}
                for p in dominant_frequencies(rec, axis, args.freqs)
            ]
    if "x" in cols and "y" in cols:
        summary = frequency_summary(rec)
        for key in ("ratio", "ratio_pq", "ratio_error", "closure_period", "closure"):
            if key in summary:
                out[key] = summary[key]
    if args.period is not None:
        out["closure_at_period"] = closure_metric(rec, args.period)
    print(json.dumps(_jsonable(out), indent=2))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import format_report, validate

    progress = (lambda s: print(f"... {s}", file=sys.stderr)) if args.verbose else None
    results = validate(dt=args.dt, progress=progress)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iontraj", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a JSON scenario config")
    r.add_argument("config")
    r.add_argument("--out", default=".", help="output directory for CSV/SVG")
    r.add_argument("--deterministic", action="store_true", help="single-threaded BLAS")
    r.set_defaults(func=cmd_run)

    pr = sub.add_parser("preset", help="run or print a named preset")
    pr.add_argument("name", choices=PRESET_NAMES)
    pr.add_argument("--emit-config", action="store_true", help="print the preset's JSON config instead of running")
    pr.add_argument("--out", default=None, help="output directory")
    pr.add_argument("--deterministic", action="store_true")
    pr.set_defaults(func=cmd_preset)

    a = sub.add_parser("analyze", help="spectral and closure analysis of a trajectory CSV")
    a.add_argument("csv")
    a.add_argument("--freqs", type=int, default=3, help="number of peaks per axis")
    a.add_argument("--period", type=float, default=None, help="candidate closure period in tau")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("validate", help="run the invariant and oracle suite")
    v.add_argument("--dt", type=float, default=None, help="override the stepper dt (convergence checks)")
    v.add_argument("-v", "--verbose", action="store_true")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PHYSICS_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
