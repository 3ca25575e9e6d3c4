#!/usr/bin/env python3
"""Regenerate the golden outputs for every shipped config.

Each config in configs/ runs through the CLI into
configs/golden/<name>/; the CSV and JSON artifacts there are committed
and compared byte-for-byte by the test suite.  Timings are deleted
because they are run-dependent by design.
"""

import os
import shutil
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(ROOT, "configs")
GOLDEN_DIR = os.path.join(CONFIG_DIR, "golden")

SUBCOMMAND = {
    "classify": "classify",
    "torus-seq": "seq",
    "nc-seq": "seq",
    "correlate": "correlate",
    "weyl": "weyl",
    "decompose": "decompose",
}


def main() -> int:
    import json

    configs = sorted(f for f in os.listdir(CONFIG_DIR) if f.endswith(".json"))
    if not configs:
        print("no configs found", file=sys.stderr)
        return 1
    for name in configs:
        base = name[:-5]
        with open(os.path.join(CONFIG_DIR, name)) as f:
            kind = json.load(f)["kind"]
        out = os.path.join(GOLDEN_DIR, base)
        if os.path.isdir(out):
            shutil.rmtree(out)
        cmd = [sys.executable, "-m", "nilseqlab.cli", SUBCOMMAND[kind],
               "--config", os.path.join(CONFIG_DIR, name),
               "--out", out, "--precision", "fast"]
        print("+", " ".join(cmd))
        res = subprocess.run(cmd)
        if res.returncode != 0:
            print(f"FAILED: {name} (exit {res.returncode})", file=sys.stderr)
            return res.returncode
        timings = os.path.join(out, "timings.json")
        if os.path.exists(timings):
            os.remove(timings)
    print(f"golden outputs written under {GOLDEN_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
