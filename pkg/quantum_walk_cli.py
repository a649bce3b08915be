"""
Quantum walk sweep command line.

Usage:
    # full figure set
    python quantum_walk_cli.py --preset figures --threads 8 --out results --emit-svg

    # explicit sweep
    python quantum_walk_cli.py --coin hadamard --density 0,0.1 --steps 100 --ensemble 250 --seed 1

    # JSON config file, CLI flags override its values
    python quantum_walk_cli.py --config sweep.json --threads 4
"""

import argparse
import logging
import logging.handlers
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from PlotDataExporter import emit_plot_data
from SweepConfigLoader import build_config, check_presets_loaded, list_presets, load_config_file
from SweepOrchestrator import RunSummary, run_sweep
from WalkErrors import QuantumWalkError

logger = logging.getLogger("quantum_walk_cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Rich console handler plus a rotating file log (path from QUANTUM_WALK_LOG)"""
    level = (level or os.getenv("QUANTUM_WALK_LOG_LEVEL", "INFO")).upper()
    log_file = log_file or os.getenv("QUANTUM_WALK_LOG", "quantum_walk.log")

    root = logging.getLogger()
    root.setLevel(logging.DEBUG)
    for handler in list(root.handlers):
        root.removeHandler(handler)

    console = RichHandler(rich_tracebacks=True, show_path=False)
    console.setLevel(level)
    root.addHandler(console)

    file_handler = logging.handlers.RotatingFileHandler(
        log_file, maxBytes=10 * 1024 * 1024, backupCount=5  # 10MB per file, 5 backups
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(file_handler)


def _csv_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _float_list(value: str) -> List[float]:
    try:
        return [float(item) for item in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated numbers, got '{value}'")


def _int_list(value: str) -> List[int]:
    try:
        return [int(item) for item in _csv_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got '{value}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Discrete-time quantum walks on a 2D lattice with random absorbing traps"
    )
    parser.add_argument("--preset", help=f"Named preset from sweep_presets.yaml ({', '.join(list_presets())})")
    parser.add_argument("--config", help="JSON config file mirroring SweepConfig")
    parser.add_argument("--coin", type=_csv_list, dest="coins", help="hadamard,fourier,grover")
    parser.add_argument("--density", type=_float_list, dest="densities", help="Trap densities, e.g. 0,0.01,0.1")
    parser.add_argument("--steps", type=int, help="Walk length T")
    parser.add_argument("--ensemble", type=int, help="Trap configurations M per (coin, density)")
    parser.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    parser.add_argument("--sigma-mode", choices=["conditional", "raw"], dest="sigma_mode")
    parser.add_argument("--snapshot-at", type=_int_list, dest="snapshot_times", help="Times of saved grids, e.g. 100")
    parser.add_argument("--out", dest="output_dir", help="Output directory")
    parser.add_argument("--threads", type=int, help="Worker processes (default: QUANTUM_WALK_THREADS or 1)")
    parser.add_argument("--emit-svg", action="store_const", const=True, dest="emit_svg",
                        help="Also render SVG figures")
    parser.add_argument("--save-masks", action="store_const", const=True, dest="save_masks",
                        help="Archive every trap mask as CSV under <out>/masks")
    parser.add_argument("--log-level", default=None, help="Console log level (default: QUANTUM_WALK_LOG_LEVEL or INFO)")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    keys = ["coins", "densities", "steps", "ensemble", "seed", "sigma_mode", "snapshot_times",
            "output_dir", "threads", "emit_svg", "save_masks"]
    return {key: getattr(args, key) for key in keys if getattr(args, key) is not None}


def print_summary(summary: RunSummary, console: Console) -> None:
    table = Table(title=f"Sweep results ({summary.output_dir})")
    for column in ("coin", "p", "<sigma>(T)", "S(T)", "survivors(T)", "tau_decoh", "KWW tau", "KWW beta", "time [s]"):
        table.add_column(column, justify="right" if column != "coin" else "left")
    for result in summary.results:
        kww = result.kww or {}
        table.add_row(
            result.coin,
            f"{result.density:g}",
            "-" if result.final_sigma is None else f"{result.final_sigma:.4f}",
            f"{result.final_survival:.4g}",
            str(result.final_survivors),
            "-" if result.decoherence_time is None else str(result.decoherence_time),
            f"{kww['tau']:.4g}" if kww else "-",
            f"{kww['beta']:.4f}" if kww else "-",
            f"{result.duration_seconds:.1f}",
        )
    console.print(table)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    if not check_presets_loaded():
        logger.warning("Sweep presets not loaded - only explicit flags and config files are available")

    try:
        file_values = load_config_file(args.config) if args.config else None
        overrides = overrides_from_args(args)
        environment = {"threads": os.getenv("QUANTUM_WALK_THREADS") or None}
        config = build_config(args.preset, file_values, overrides, environment)

        logger.info(
            f"Sweep: coins={[c.value for c in config.coins]} densities={config.densities} "
            f"T={config.steps} M={config.ensemble} seed={config.seed} mode={config.sigma_mode}"
        )
        summary = run_sweep(config)
        emit_plot_data(summary)
    except (QuantumWalkError, FileNotFoundError) as e:
        logger.error(f"Sweep failed: {e}")
        return 2

    print_summary(summary, Console())
    return 0


if __name__ == "__main__":
    sys.exit(main())
