#!/usr/bin/env python3
"""Run every figure-reproduction preset and report the written files.

Usage:  python scripts/run_all_figures.py [outdir]

Each preset writes one CSV per (index set x criterion) into
<outdir>/<preset>/; outputs are byte-identical across runs.
"""

import sys
from pathlib import Path

from clickwitness.cli import run
from clickwitness.scenarios import presets


def main() -> int:
    base = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results")
    for name, scenario in presets().items():
        paths = run(scenario, outdir=base / name)
        print(f"{name}: {len(paths)} files")
        for path in paths:
            print(f"  {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
