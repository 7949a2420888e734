"""The command line in one sitting: gen, filter, eval, bench.

Everything the library does is reachable from the dynahull command.
This script shells out the way a user would, working in a temp
directory, and prints each command before running it.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

def run(*args, expect=0):
    cmd = [sys.executable, "-m", "dynahull.cli", *args]
    print("\n$ dynahull " + " ".join(args))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != expect:
        print(proc.stderr)
        raise SystemExit(f"exit {proc.returncode}, expected {expect}")
    out = proc.stdout.strip()
    if out:
        print(out[:600])
    return proc

with tempfile.TemporaryDirectory() as d:
    d = Path(d)
    scan = d / "scan.pcd"
    clean = d / "clean.pcd"

    # 1. synthesize a labeled scan (sidecar json keeps the scenario,
    #    actor trajectories and true ground plane)
    run("gen", "--out", str(scan), "--frames", "25", "--actors", "3",
        "--seed", "5")

    # 2. filter it; the report json records the whole removal plan
    run("filter", "--in", str(scan), "--out", str(clean), "--seed", "0")
    report = json.loads((d / "clean.report.json").read_text())
    print(f"   kept {report['output']['points']} of "
          f"{report['input']['points']} points")
    for row in report["clusters"]:
        print(f"   cluster {row['cluster']}: {row['count']} pts, "
              f"{row['removal_pct']:.2f}% -> {row['removed_count']} removed")

    # 3. score the result; the original scan is labeled, so passing it
    #    as --orig together with the removed set unlocks the confusion
    #    block
    run("eval", "--pred", str(clean), "--truth", str(scan),
        "--removed", str(d / "clean.removed.json"),
        "--orig", str(scan), "--n-samples", "128")

    # 4. sweep a parameter and compare rows (here: neighborhood size)
    run("bench", "--in", str(scan), "--axis", "k", "--values", "50,75",
        "--n-samples", "64")

    # bad input exits nonzero with a message on stderr, not a traceback
    proc = run("filter", "--in", str(d / "missing.pcd"),
               "--out", str(clean), expect=3)
    print(f"   missing input -> exit {proc.returncode}")
