# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

"""
Developer plots for a stefan-lab output directory.

    python scripts/plot_results.py out/active_jump [--save figures/]

Draws whichever of solution.csv, newton_log.csv, sweep.csv and
energy_scan.csv the directory holds.
"""

import argparse
import os
import sys
from collections import defaultdict
import matplotlib
import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from services.export_service import read_csv  # noqa: E402
import logging  # noqa: E402
logger = logging.getLogger(__name__)


def _columns(path):
    _hash, header, rows = read_csv(path)
    return {name: [row[i] for row in rows] for i, name in enumerate(header)}


def _floats(values):
    return np.array([float(v) if v != "" else np.nan for v in values])


def plot_solution(ax, path, levels=5):
    data = _columns(path)
    if "y" in data:
        ax.set_title("solution.csv holds a 2D field; only 1D profiles are drawn")
        return
    level = np.array([int(v) for v in data["level"]])
    x = _floats(data["x"])
    u = _floats(data["u"])
    time = _floats(data["time"])
    chosen = np.unique(np.linspace(0, level.max(), levels).round().astype(int))
    for m in chosen:
        pick = level == m
        ax.plot(x[pick], u[pick], label=f"t = {time[pick][0]:.4g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize="small")


def plot_newton(ax, path):
    data = _columns(path)
    ax.semilogy(_floats(data["time"]), _floats(data["final_residual"]), marker=".")
    ax.set_xlabel("t")
    ax.set_ylabel("final residual")


def plot_sweep(ax, path):
    data = _columns(path)
    eps = _floats(data["eps"])
    distance = _floats(data["sup_distance_to_prev"])
    ax.loglog(eps[1:], distance[1:], marker="o")
    ax.invert_xaxis()
    ax.set_xlabel("eps")
    ax.set_ylabel("sup |u_i - u_(i-1)|")


def plot_energy(ax, path):
    data = _columns(path)
    series = defaultdict(list)
    for eps, sigma, energy in zip(data["eps"], data["sigma"], data["energy"]):
        series[eps].append((float(sigma), float(energy)))
    for eps, points in sorted(series.items(), key=lambda item: float(item[0] or 0.0), reverse=True):
        points = [pt for pt in sorted(points) if pt[1] > 0.0]
        if points:
            sigma, energy = zip(*points)
            ax.loglog(sigma, energy, marker="o", label=f"eps = {eps}")
    ax.set_xlabel("sigma")
    ax.set_ylabel("near-jump energy")
    ax.legend(fontsize="small")


PLOTS = (
    ("solution.csv", plot_solution),
    ("newton_log.csv", plot_newton),
    ("sweep.csv", plot_sweep),
    ("energy_scan.csv", plot_energy),
)


def main(argv=None):
    parser = argparse.ArgumentParser(description="Plot the CSV artefacts of a stefan-lab run.")
    parser.add_argument("directory")
    parser.add_argument("--save", default=None, help="write PNG files here instead of showing a window")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    if args.save:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    found = [(name, draw) for name, draw in PLOTS if os.path.exists(os.path.join(args.directory, name))]
    if not found:
        logger.error(f"No known CSV files in {args.directory}")
        return 1
    for name, draw in found:
        fig, ax = plt.subplots(figsize=(6, 4))
        draw(ax, os.path.join(args.directory, name))
        ax.set_title(ax.get_title() or name)
        fig.tight_layout()
        if args.save:
            os.makedirs(args.save, exist_ok=True)
            target = os.path.join(args.save, name.replace(".csv", ".png"))
            fig.savefig(target, dpi=120)
            logger.info(f"Saved {target}")
            plt.close(fig)
    if not args.save:
        plt.show()
    return 0


if __name__ == "__main__":
    sys.exit(main())
