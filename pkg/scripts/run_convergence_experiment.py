#!/usr/bin/env python3
"""Run the manufactured-solution time-step study (filtered, then plain
backward Euler for contrast) and render the log-log figure when the
plotting scripts are present.

Outputs: rates.csv (filtered), unfiltered/rates.csv and (optionally)
convergence.png under --output-dir.
"""

import argparse
import subprocess
import sys
from pathlib import Path

from tfmhd.cli import main as tfmhd_main

FIGURES = Path(__file__).resolve().parent.parent / "figures" / "plot_convergence.py"


def run(argv):
    code = tfmhd_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", default="results/convergence")
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--dts", default="0.1,0.05,0.025,0.0125")
    args = parser.parse_args()

    out = args.output_dir
    run(["converge", "--n", str(args.n), "--dts", args.dts, "--output-dir", out, "-v"])
    run(["converge", "--n", str(args.n), "--dts", args.dts, "--no-filter",
         "--output-dir", str(Path(out) / "unfiltered"), "-v"])

    if FIGURES.is_file():
        image = Path(out) / "convergence.png"
        subprocess.run(
            [sys.executable, str(FIGURES), str(Path(out) / "rates.csv"), str(image)],
            check=True,
        )
        print(f"wrote {image}")
    else:
        print("plotting scripts not present; CSVs written only")


if __name__ == "__main__":
    main()
