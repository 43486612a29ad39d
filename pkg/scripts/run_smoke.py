"""Tiny end-to-end run: generate, train, evaluate, report, in ./runs/smoke.

Finishes in about a minute; numbers are Monte-Carlo-noisy at this scale
and only demonstrate the pipeline.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cv2xsim.cli import main

OUT = os.path.join("runs", "smoke")
CFG = os.path.join(OUT, "smoke.cfg")

os.makedirs(OUT, exist_ok=True)
with open(CFG, "w") as fh:
    fh.write(
        "speeds_kmph=100,400\n"
        "snr_db=0:5:5\n"
        "n_subframes=10\n"
        "epochs=3\n"
        "batch_size=8\n"
    )

for args in (
    ["gen", "--config", CFG, "--out", OUT],
    ["train", "--config", CFG, "--out", OUT],
    ["eval", "--config", CFG, "--out", OUT],
    ["report", "--out", OUT],
):
    code = main(args)
    if code != 0:
        sys.exit(code)

print(f"\nsmoke run complete; see {OUT}/metrics.csv")
with open(os.path.join(OUT, "metrics.csv")) as fh:
    print(fh.read())
