"""
Plot Data Exporter
Turns a finished RunSummary into figure data:

    sigma_table_<coin>.csv                 t, one <sigma> column per density, classical
    heightmap_<coin>_p<val>_t<t>.csv       full 2D probability matrix
    sigma_<coin>.svg                       log-log <sigma>(t) with the classical line
    distribution_<coin>_p<val>_t<t>.svg    probability heatmap

SVG output is optional and rendered with matplotlib's Agg backend.
"""

import csv
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ClassicalWalk import classical_sigma
from LatticeWalkEngine import ProbabilityGrid, read_grid_csv, write_heightmap_csv
from SweepOrchestrator import EnsembleResult, RunSummary, density_label
from WalkStatistics import SERIES_FLOAT_FORMAT, SigmaSeries, read_sigma_csv

logger = logging.getLogger("plot_export")


def _group_by_coin(summary: RunSummary) -> Dict[str, List[EnsembleResult]]:
    groups: Dict[str, List[EnsembleResult]] = OrderedDict()
    for result in summary.results:
        groups.setdefault(result.coin, []).append(result)
    return groups


def _format(value: float) -> str:
    return "" if not np.isfinite(value) else format(float(value), SERIES_FLOAT_FORMAT)


def write_sigma_table(coin: str, columns: Dict[str, SigmaSeries], classical: SigmaSeries, path) -> Path:
    """Multi-column <sigma>(t) table with the sqrt(2t) classical reference"""
    path = Path(path)
    labels = list(columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + labels + ["classical"])
        for index, t in enumerate(classical.times):
            row = [int(t)] + [_format(columns[label].sigma[index]) for label in labels]
            writer.writerow(row + [_format(classical.sigma[index])])
    logger.debug(f"Wrote sigma table for {coin} to {path}")
    return path


def render_sigma_svg(coin: str, columns: Dict[str, SigmaSeries], classical: SigmaSeries, path) -> Path:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    plt.rcParams["svg.hashsalt"] = "quantum-walk"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, series in columns.items():
        ax.loglog(series.times, series.sigma, label=label.replace("p", "p = ", 1))
    ax.loglog(classical.times, classical.sigma, "k--", label="classical")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\langle\sigma\rangle$")
    ax.set_title(f"{coin.capitalize()} walk")
    ax.legend(loc="upper left", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def render_distribution_svg(coin: str, density: float, grid: ProbabilityGrid, path) -> Path:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    plt.rcParams["svg.hashsalt"] = "quantum-walk"
    L = grid.half_width
    fig, ax = plt.subplots(figsize=(5, 4.5))
    image = ax.imshow(grid.values.T, origin="lower", extent=(-L - 0.5, L + 0.5, -L - 0.5, L + 0.5),
                      cmap="viridis", interpolation="nearest")
    fig.colorbar(image, ax=ax, label="P(m, n)")
    ax.set_xlabel("m")
    ax.set_ylabel("n")
    ax.set_title(f"{coin.capitalize()} walk, p = {density:g}, t = {grid.t}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit_plot_data(summary: RunSummary, emit_svg: Optional[bool] = None,
                   output_dir: Optional[str] = None) -> List[Path]:
    """Write figure data for every coin in the summary; returns written paths"""
    config = summary.config
    steps = int(config["steps"])
    half_width = steps + 1
    if emit_svg is None:
        emit_svg = bool(config.get("emit_svg", False))
    base = Path(output_dir or summary.output_dir or config["output_dir"])

    classical = classical_sigma(steps)
    written: List[Path] = []
    for coin, results in _group_by_coin(summary).items():
        columns: Dict[str, SigmaSeries] = OrderedDict()
        for result in results:
            columns[density_label(result.density)] = read_sigma_csv(
                base / result.sigma_file, coin=coin, density=result.density, mode=config.get("sigma_mode", "conditional")
            )
        written.append(write_sigma_table(coin, columns, classical, base / f"sigma_table_{coin}.csv"))
        if emit_svg:
            written.append(render_sigma_svg(coin, columns, classical, base / f"sigma_{coin}.svg"))

        for result in results:
            for t, name in sorted(result.snapshot_files.items()):
                grid = read_grid_csv(base / name, half_width, int(t))
                stem = f"{coin}_{density_label(result.density)}_t{t}"
                written.append(write_heightmap_csv(grid, base / f"heightmap_{stem}.csv"))
                if emit_svg:
                    written.append(render_distribution_svg(coin, result.density, grid, base / f"distribution_{stem}.svg"))

    logger.info(f"Wrote {len(written)} plot data files to {base}")
    return written
