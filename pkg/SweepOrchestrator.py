"""
Sweep Orchestrator
Runs every (coin, density) pair of a SweepConfig over M trap configurations,
aggregates the ensemble and writes the result files:

    sigma_<coin>_p<val>.csv            <sigma>(t) in the selected mode
    sigma_<other>_<coin>_p<val>.csv    <sigma>(t) in the other mode
    survival_<coin>_p<val>.csv         ensemble-mean survival S(t)
    snapshot_<coin>_p<val>_t<t>.csv    ensemble-mean P(m, n) at snapshot times
    summary.json                       RunSummary

Ensemble members are the unit of work. They are handed to a process pool in
index order and consumed in index order, so every reduction sees the same
operand order whatever the worker count.
"""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np

from LatticeWalkEngine import ProbabilityGrid, iter_walk, survival_probability, write_grid_csv
from QuantumCoins import CoinKind
from SweepConfigLoader import SweepConfig
from TrapLattice import MASK_FORMAT_VERSION, generate_traps, write_mask_csv
from WalkErrors import FitError, InsufficientDataError, OutputDirectoryError
from WalkStatistics import (
    SIGMA_MODES,
    SigmaSeries,
    decoherence_time,
    ensemble_sigma,
    kww_fit,
    mean_survival,
    sigma_of,
    write_sigma_csv,
    write_survival_csv,
)

logger = logging.getLogger("sweep_orchestrator")

SUMMARY_FILE = "summary.json"


def density_label(density: float) -> str:
    return f"p{format(float(density), 'g')}"


def sigma_file_name(coin: str, density: float, mode: Optional[str] = None) -> str:
    prefix = "sigma" if mode is None else f"sigma_{mode}"
    return f"{prefix}_{coin}_{density_label(density)}.csv"


def survival_file_name(coin: str, density: float) -> str:
    return f"survival_{coin}_{density_label(density)}.csv"


def snapshot_file_name(coin: str, density: float, t: int) -> str:
    return f"snapshot_{coin}_{density_label(density)}_t{t}.csv"


# ==================== ENSEMBLE MEMBER ====================
@dataclass(frozen=True)
class MemberTask:
    coin: str
    density: float
    steps: int
    seed: int
    config_index: int
    snapshot_times: Tuple[int, ...] = ()
    mask_path: Optional[str] = None


@dataclass
class MemberResult:
    config_index: int
    sigma_conditional: np.ndarray
    sigma_raw: np.ndarray
    survival: np.ndarray
    snapshots: Dict[int, np.ndarray] = field(default_factory=dict)


def simulate_member(task: MemberTask) -> MemberResult:
    """One walk on the trap configuration keyed (seed, config_index)"""
    traps = generate_traps(task.steps + 1, task.density, task.seed, task.config_index)
    if task.mask_path:
        write_mask_csv(traps, task.mask_path)

    conditional, raw, survival = [], [], []
    snapshots: Dict[int, np.ndarray] = {}
    for grid in iter_walk(task.coin, task.steps, traps):
        survival.append(survival_probability(grid))
        if grid.t >= 1:
            value = sigma_of(grid, "conditional")
            conditional.append(np.nan if value is None else value)
            raw.append(sigma_of(grid, "raw"))
        if grid.t in task.snapshot_times:
            snapshots[grid.t] = grid.values.copy()

    return MemberResult(
        config_index=task.config_index,
        sigma_conditional=np.array(conditional, dtype=np.float64),
        sigma_raw=np.array(raw, dtype=np.float64),
        survival=np.array(survival, dtype=np.float64),
        snapshots=snapshots,
    )


def _member_series(result: MemberResult, mode: str, task: MemberTask) -> SigmaSeries:
    sigma = result.sigma_conditional if mode == "conditional" else result.sigma_raw
    return SigmaSeries(
        times=np.arange(1, task.steps + 1, dtype=np.int64),
        sigma=sigma,
        survivors=(~np.isnan(sigma)).astype(np.int64),
        coin=task.coin,
        density=task.density,
        seed=task.seed,
        mode=mode,
        config_index=task.config_index,
    )


# ==================== SUMMARY TYPES ====================
@dataclass
class EnsembleResult:
    """Aggregated outputs of one (coin, density) pair"""
    coin: str
    density: float
    ensemble: int
    sigma_file: str
    alternate_sigma_file: str
    survival_file: str
    snapshot_files: Dict[int, str] = field(default_factory=dict)
    final_sigma: Optional[float] = None
    final_survival: float = 1.0
    final_survivors: int = 0
    min_survivors: int = 0
    decoherence_time: Optional[int] = None
    decoherence_note: Optional[str] = None
    kww: Optional[Dict[str, float]] = None
    kww_note: Optional[str] = None
    duration_seconds: float = 0.0


@dataclass
class RunSummary:
    config: Dict[str, Any]
    results: List[EnsembleResult] = field(default_factory=list)
    started_at: str = ""
    duration_seconds: float = 0.0
    mask_format_version: int = MASK_FORMAT_VERSION
    output_dir: str = ""

    def result_for(self, coin: "CoinKind | str", density: float) -> EnsembleResult:
        coin = coin.value if isinstance(coin, CoinKind) else str(coin)
        for result in self.results:
            if result.coin == coin and result.density == float(density):
                return result
        raise KeyError(f"No result for coin={coin} p={density}")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for result in data["results"]:
            result["snapshot_files"] = {str(t): name for t, name in result["snapshot_files"].items()}
        return data

    def write(self, path) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, allow_nan=False)
            fh.write("\n")
        return path


def load_summary(path) -> RunSummary:
    """Read summary.json back into a RunSummary"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Summary file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    results = []
    for item in data.pop("results", []):
        item["snapshot_files"] = {int(t): name for t, name in item.get("snapshot_files", {}).items()}
        results.append(EnsembleResult(**item))
    return RunSummary(results=results, **data)


# ==================== ORCHESTRATION ====================
def _finite_or_none(value: float) -> Optional[float]:
    return None if value is None or not np.isfinite(value) else float(value)


def _prepare_output_dir(output_dir: Path) -> Path:
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        probe = output_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as e:
        logger.error(f"Output directory {output_dir} is not writable: {e}")
        raise OutputDirectoryError(f"Output directory {output_dir} is not writable: {e}") from e
    return output_dir


class SweepOrchestrator:
    """Runs a sweep end to end; workers are processes when threads > 1"""

    def __init__(self, config: SweepConfig):
        self.config = config.validate()
        self.output_dir = Path(config.output_dir)
        self.batch_size = max(1, 4 * self.config.threads)

    def _tasks(self, coin: CoinKind, density: float) -> List[MemberTask]:
        mask_dir = self.output_dir / "masks" if self.config.save_masks else None
        tasks = []
        for r in range(self.config.ensemble):
            mask_path = None
            if mask_dir is not None:
                mask_path = str(mask_dir / f"mask_{coin.value}_{density_label(density)}_r{r}.csv")
            tasks.append(MemberTask(
                coin=coin.value,
                density=density,
                steps=self.config.steps,
                seed=self.config.seed,
                config_index=r,
                snapshot_times=tuple(self.config.snapshot_times),
                mask_path=mask_path,
            ))
        return tasks

    def _members(self, tasks: List[MemberTask], pool: Optional[ProcessPoolExecutor]) -> Iterator[MemberResult]:
        """Results in index order; at most one batch is in flight"""
        if pool is None:
            yield from map(simulate_member, tasks)
            return
        for start in range(0, len(tasks), self.batch_size):
            yield from pool.map(simulate_member, tasks[start:start + self.batch_size])

    def run_pair(self, coin: CoinKind, density: float,
                 pool: Optional[ProcessPoolExecutor] = None) -> EnsembleResult:
        """Simulate and aggregate one (coin, density) ensemble"""
        config = self.config
        started = time.perf_counter()
        logger.info(f"Starting ensemble coin={coin.value} p={density} M={config.ensemble} T={config.steps}")

        tasks = self._tasks(coin, density)
        series: Dict[str, List[SigmaSeries]] = {mode: [] for mode in SIGMA_MODES}
        survivals: List[np.ndarray] = []
        snapshot_sums = {t: None for t in config.snapshot_times}

        for task, member in zip(tasks, self._members(tasks, pool)):
            series["conditional"].append(_member_series(member, "conditional", task))
            series["raw"].append(_member_series(member, "raw", task))
            survivals.append(member.survival)
            for t, values in member.snapshots.items():
                snapshot_sums[t] = values.copy() if snapshot_sums[t] is None else snapshot_sums[t] + values

        averaged = {mode: ensemble_sigma(members) for mode, members in series.items()}
        survival = mean_survival(survivals)
        selected = averaged[config.sigma_mode]
        other_mode = next(mode for mode in SIGMA_MODES if mode != config.sigma_mode)

        result = EnsembleResult(
            coin=coin.value,
            density=density,
            ensemble=config.ensemble,
            sigma_file=sigma_file_name(coin.value, density),
            alternate_sigma_file=sigma_file_name(coin.value, density, other_mode),
            survival_file=survival_file_name(coin.value, density),
            final_sigma=_finite_or_none(selected.sigma[-1]),
            final_survival=float(survival[-1]),
            final_survivors=int(selected.survivors[-1]),
            min_survivors=int(selected.survivors.min()),
        )

        write_sigma_csv(selected, self.output_dir / result.sigma_file)
        write_sigma_csv(averaged[other_mode], self.output_dir / result.alternate_sigma_file)
        write_survival_csv(range(len(survival)), survival, self.output_dir / result.survival_file)
        for t, total in snapshot_sums.items():
            name = snapshot_file_name(coin.value, density, t)
            write_grid_csv(ProbabilityGrid(config.half_width, total / config.ensemble, t), self.output_dir / name)
            result.snapshot_files[t] = name

        try:
            result.decoherence_time = decoherence_time(
                selected, config.decoherence_window, config.decoherence_threshold
            )
            if result.decoherence_time is None:
                result.decoherence_note = "local slope never settled below threshold"
        except InsufficientDataError as e:
            logger.warning(f"Decoherence time skipped for coin={coin.value} p={density}: {e}")
            result.decoherence_note = str(e)

        try:
            fit = kww_fit(survival[1:])
            result.kww = fit.to_dict()
        except (FitError, InsufficientDataError) as e:
            log = logger.info if density == 0.0 else logger.warning
            log(f"KWW fit skipped for coin={coin.value} p={density}: {e}")
            result.kww_note = str(e)

        result.duration_seconds = time.perf_counter() - started
        logger.info(
            f"Completed coin={coin.value} p={density}: <sigma>(T)={result.final_sigma} "
            f"S(T)={result.final_survival:.6g} tau_decoh={result.decoherence_time} "
            f"({result.duration_seconds:.2f}s)"
        )
        return result

    def run(self) -> RunSummary:
        config = self.config
        _prepare_output_dir(self.output_dir)
        if config.save_masks:
            _prepare_output_dir(self.output_dir / "masks")

        summary = RunSummary(
            config=config.to_dict(),
            started_at=datetime.now().isoformat(),
            output_dir=str(self.output_dir),
        )
        started = time.perf_counter()
        pairs = [(coin, density) for coin in config.coins for density in config.densities]
        logger.info(f"Sweep over {len(pairs)} (coin, density) pairs with {config.threads} worker(s)")

        pool = ProcessPoolExecutor(max_workers=config.threads) if config.threads > 1 else None
        try:
            for coin, density in pairs:
                summary.results.append(self.run_pair(coin, density, pool))
        finally:
            if pool is not None:
                pool.shutdown()

        summary.duration_seconds = time.perf_counter() - started
        summary.write(self.output_dir / SUMMARY_FILE)
        logger.info(f"Sweep finished in {summary.duration_seconds:.2f}s, summary at {self.output_dir / SUMMARY_FILE}")
        return summary


def run_sweep(config: SweepConfig) -> RunSummary:
    return SweepOrchestrator(config).run()
