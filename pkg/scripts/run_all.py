#!/usr/bin/env python3
"""Drive every bundled config through the CLI and summarize the reports.

Usage:
    python scripts/run_all.py [--out-dir OUT]

Writes one report per config (plus CSV clouds for the image runs) and prints
a one-line summary per run.  The nonconvex probe config is expected to fail
its convexity check; every other run is expected to pass.
"""

import argparse
import json
import sys
from pathlib import Path

from multisymp.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent
RUNS = [
    ("verify", "verify_area.json", 0),
    ("verify", "verify_ellipsoid.json", 0),
    ("verify", "verify_probe.json", 1),  # detector sensitivity: must fail
    ("action", "action_plane.json", 0),
    ("action", "action_bilinear.json", 0),
    ("image", "image_area.json", 0),
    ("image", "image_ellipsoid.json", 0),
]


def run(out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    bad = 0
    for command, config, expected in RUNS:
        report_path = out_dir / config.replace(".json", ".report.json")
        code = cli_main([command, "--config", str(ROOT / "configs" / config),
                         "--out", str(report_path)])
        with open(report_path) as stream:
            report = json.load(stream)
        checks = report.get("checks", [])
        failed = [c["name"] for c in checks if c["status"] == "fail"]
        status = "ok" if code == expected else f"UNEXPECTED exit {code} (wanted {expected})"
        if code != expected:
            bad += 1
        print(f"{command:7s} {config:26s} exit={code} checks={len(checks)} "
              f"failed={failed or '-'} [{status}]")
    return 1 if bad else 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="out", help="directory for reports and CSV files")
    args = parser.parse_args()
    sys.exit(run(Path(args.out_dir)))
