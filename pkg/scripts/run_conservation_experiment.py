#!/usr/bin/env python3
"""Run the ideal-MHD conservation benchmark, filtered and unfiltered,
and render the comparison figure when the plotting scripts are present.

Outputs: orszag_tang_filtered.csv, orszag_tang_unfiltered.csv and
(optionally) conservation.png under --output-dir.
"""

import argparse
import subprocess
import sys
from pathlib import Path

from tfmhd.cli import main as tfmhd_main

FIGURES = Path(__file__).resolve().parent.parent / "figures" / "plot_conservation.py"


def run(argv):
    code = tfmhd_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--output-dir", default="results/conservation")
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--dt", type=float, default=0.01)
    parser.add_argument("--t-end", type=float, default=2.7)
    args = parser.parse_args()

    out = args.output_dir
    common = ["--n", str(args.n), "--dt", str(args.dt), "--t-end", str(args.t_end),
              "--output-dir", out, "-v"]
    run(["orszag-tang", *common])
    run(["orszag-tang", "--no-filter", *common])

    if FIGURES.is_file():
        image = Path(out) / "conservation.png"
        subprocess.run(
            [sys.executable, str(FIGURES),
             str(Path(out) / "orszag_tang_filtered.csv"),
             str(Path(out) / "orszag_tang_unfiltered.csv"),
             str(image)],
            check=True,
        )
        print(f"wrote {image}")
    else:
        print("plotting scripts not present; CSVs written only")


if __name__ == "__main__":
    main()
