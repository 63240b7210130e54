"""Shared CSV loading and deterministic figure saving for the plot scripts.

The scripts consume the solver CLI's CSV files and never recompute physics:
every plotted number comes straight out of a CSV column.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "tfmhd-figures"  # deterministic SVG ids


class PlotDataError(Exception):
    """Input CSV is missing, empty, or lacks a required column."""


def load_csv(path: str, required_columns) -> list[dict]:
    """Read a diagnostics/rates CSV, skipping comment (truncation-marker) lines."""
    file = Path(path)
    if not file.is_file():
        raise PlotDataError(f"input CSV not found: {path}")
    with open(file, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if reader.fieldnames is None:
            raise PlotDataError(f"empty CSV (no header): {path}")
        for column in required_columns:
            if column not in reader.fieldnames:
                raise PlotDataError(f"missing column '{column}' in {path}")
        rows = list(reader)
    if not rows:
        raise PlotDataError(f"CSV has a header but no data rows: {path}")
    return rows


def column(rows: list[dict], name: str) -> list[float]:
    return [float(r[name]) for r in rows if r[name] != ""]


def save_deterministic(fig, out_path: str) -> None:
    """Write the figure without embedded timestamps, format by extension."""
    suffix = Path(out_path).suffix.lower()
    metadata = None
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    fig.savefig(out_path, metadata=metadata)


def run_main(build) -> int:
    """Run a script body, mapping data errors to a message and exit code 1."""
    try:
        build()
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
