"""CSV writers.  Floats use 17 significant digits with ``.`` as decimal point."""

from __future__ import annotations

import csv
import os

import numpy as np

from .simulation import RunResult

__all__ = ["fmt", "write_csv", "write_run", "density_filename"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if np.isnan(x) else format(x, ".17g")
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def density_filename(t: float) -> str:
    return f"density_{format(float(t), 'g')}.csv"


def write_run(result: RunResult, out_dir) -> list[str]:
    """Write ``timeseries.csv`` and one ``density_<t>.csv`` per snapshot."""
    os.makedirs(out_dir, exist_ok=True)
    s = result.series
    paths = [os.path.join(out_dir, "timeseries.csv")]
    write_csv(paths[0], ["t", "mass", "energy", "m3", "negativity_events"],
              zip(s.times, s.mass, s.energy, s.m3, s.negativity_events))
    g = result.grid
    for t in sorted(result.snapshots):
        n = result.snapshots[t]
        path = os.path.join(out_dir, density_filename(t))
        write_csv(path, ["omega", "f", "N"], zip(g.pivots, n / g.widths, n))
        paths.append(path)
    return paths
