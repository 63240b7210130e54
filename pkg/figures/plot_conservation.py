#!/usr/bin/env python3
"""Energy and cross helicity versus time, filtered scheme against plain
backward Euler, from two diagnostics CSVs produced by the solver CLI.

Usage: plot_conservation.py FILTERED_CSV UNFILTERED_CSV OUT_IMAGE
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plotcommon import column, load_csv, run_main, save_deterministic

REQUIRED = ("t", "energy", "cross_helicity")


def build_figure(filtered_csv: str, unfiltered_csv: str, title: str):
    filtered = load_csv(filtered_csv, REQUIRED)
    unfiltered = load_csv(unfiltered_csv, REQUIRED)

    fig, (ax_e, ax_h) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    for rows, label, style in ((filtered, "filtered BE", "-"), (unfiltered, "BE", "--")):
        t = column(rows, "t")
        ax_e.plot(t, column(rows, "energy"), style, label=label)
        ax_h.plot(t, column(rows, "cross_helicity"), style, label=label)
    ax_e.set_xlabel("t")
    ax_e.set_ylabel("energy")
    ax_h.set_xlabel("t")
    ax_h.set_ylabel("cross helicity")
    for ax in (ax_e, ax_h):
        ax.legend()
        ax.grid(True, alpha=0.3)
    fig.suptitle(title)
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("filtered_csv")
    parser.add_argument("unfiltered_csv")
    parser.add_argument("out_image")
    parser.add_argument("--title", default="Energy and cross helicity versus time")
    args = parser.parse_args(argv)

    def build():
        fig = build_figure(args.filtered_csv, args.unfiltered_csv, args.title)
        save_deterministic(fig, args.out_image)

    return run_main(build)


if __name__ == "__main__":
    sys.exit(main())
