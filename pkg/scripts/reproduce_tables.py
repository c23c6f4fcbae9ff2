#!/usr/bin/env python3
"""Rerun the desk-scale experiment grids behind the bundled result tables.

Writes one output directory per SNR point under out/:
  out/snr13: both variants, 5 iterations
  out/snr12: relaxation start, 5 iterations
  out/snr11: relaxation start, 8 iterations

Expect roughly 10-30 minutes total depending on core count.
"""

import os
import sys

from clup.cli import main

WORKERS = str(max(1, min(8, os.cpu_count() or 1)))

GRIDS = [
    ["run", "--snr-db", "13", "--variant", "clup-plt", "--variant", "clup",
     "--max-iters", "5", "--out", "out/snr13"],
    ["run", "--snr-db", "12", "--variant", "clup-plt",
     "--max-iters", "5", "--out", "out/snr12"],
    ["run", "--snr-db", "11", "--variant", "clup-plt",
     "--max-iters", "8", "--out", "out/snr11"],
]

COMMON = ["--n", "800", "--alpha", "0.8", "--r-sc", "1.3", "--trials", "50",
          "--seed", "0", "--workers", WORKERS]


if __name__ == "__main__":
    for grid in GRIDS:
        rc = main(grid + COMMON)
        if rc != 0:
            sys.exit(rc)
    print("done; see out/*/tables.txt")
