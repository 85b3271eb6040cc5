"""Run every named preset and write CSV/SVG artifacts plus a summary table.

Usage: python3 scripts/run_presets.py [OUT_DIR] [--only NAME ...]
"""

import argparse
import json
import time
from pathlib import Path

from iontraj.presets import PRESET_NAMES, preset
from iontraj.runner import run


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out", nargs="?", default="runs")
    p.add_argument("--only", nargs="*", choices=PRESET_NAMES, default=None)
    args = p.parse_args(argv)
    out = Path(args.out)
    summaries = {}
    for name in args.only or PRESET_NAMES:
        t0 = time.perf_counter()
        res = run(preset(name), out / name, deterministic=True)
        summaries[name] = {**res.summary, "runtime_s": time.perf_counter() - t0}
        print(f"{name:10s} {summaries[name]['runtime_s']:7.2f} s  " + ", ".join(f.name for f in res.files))
    (out / "summary.json").write_text(json.dumps(summaries, indent=2, default=str))
    print(f"summary written to {out / 'summary.json'}")


if __name__ == "__main__":
    main()
