#!/usr/bin/env python3
"""Log-log time-step convergence plot with first- and second-order reference
slopes, from a rates CSV produced by the solver CLI.

Usage: plot_convergence.py RATES_CSV OUT_IMAGE
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from plotcommon import column, load_csv, run_main, save_deterministic

REQUIRED = ("dt", "err_u_h1", "err_b_h1")


def build_figure(rates_csv: str, title: str):
    rows = load_csv(rates_csv, REQUIRED)
    dt = column(rows, "dt")
    err_u = column(rows, "err_u_h1")
    err_b = column(rows, "err_b_h1")

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(dt, err_u, "o-", label="velocity (H1)")
    ax.loglog(dt, err_b, "s-", label="magnetic field (H1)")
    anchor = max(err_u[0], err_b[0])
    ax.loglog(dt, [anchor * d / dt[0] for d in dt], ":", color="gray", label="slope 1")
    ax.loglog(dt, [anchor * (d / dt[0]) ** 2 for d in dt], "--", color="gray", label="slope 2")
    ax.set_xlabel("dt")
    ax.set_ylabel("discrete error norm")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("rates_csv")
    parser.add_argument("out_image")
    parser.add_argument("--title", default="Errors and rates of convergence")
    args = parser.parse_args(argv)

    def build():
        fig = build_figure(args.rates_csv, args.title)
        save_deterministic(fig, args.out_image)

    return run_main(build)


if __name__ == "__main__":
    sys.exit(main())
