"""Full-scale sweep with the default parameter set: 4 speeds x 8 SNRs x
500 subframes, 20-epoch training, all three estimators.

This is hours of CPU time and ~6 GB of dataset files.  Pass an output
directory as the first argument (default ./runs/full).
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from cv2xsim.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join("runs", "full")
os.makedirs(OUT, exist_ok=True)

for args in (
    ["gen", "--out", OUT],
    ["train", "--out", OUT],
    ["eval", "--out", OUT],
    ["report", "--out", OUT],
):
    code = main(args)
    if code != 0:
        sys.exit(code)

print(f"\nfull sweep complete; curves in {OUT}")
