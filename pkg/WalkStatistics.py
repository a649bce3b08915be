"""
Walk Statistics
Spread and survival analysis of probability grids:

- sigma_of / sigma_series: standard deviation of a distribution, either on
  the raw (decaying) grid or conditioned on survival (grid / total mass)
- ensemble_sigma / mean_survival: averages over trap configurations, summed
  with math.fsum so the result does not depend on member order
- loglog_slope / local_slopes / decoherence_time: growth exponent of sigma(t)
  and the ballistic-to-diffusive crossover
- kww_fit: stretched-exponential survival exp(-(t/tau)^beta) by linearized
  least squares
"""

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from WalkErrors import FitError, InsufficientDataError

logger = logging.getLogger("walk_statistics")

SIGMA_MODES = ("conditional", "raw")

SERIES_FLOAT_FORMAT = ".17g"

# Slope midway between ballistic (1) and diffusive (0.5) spreading
DECOHERENCE_SLOPE_THRESHOLD = 0.75
DEFAULT_SLOPE_WINDOW = 15

KWW_EPSILON = 1e-6
MIN_FIT_POINTS = 5


# ==================== DOMAIN TYPES ====================
@dataclass
class SigmaSeries:
    """sigma(t) for t = times[0..]; NaN marks an absent value (fully absorbed)"""
    times: NDArray[np.int64] = field(repr=False)
    sigma: NDArray[np.float64] = field(repr=False)
    survivors: NDArray[np.int64] = field(repr=False)
    coin: str = ""
    density: float = 0.0
    ensemble_size: int = 1
    seed: Optional[int] = None
    mode: str = "conditional"
    config_index: Optional[int] = None

    def __eq__(self, other) -> bool:
        """Same metadata and identical series; absent (NaN) values match each other"""
        if not isinstance(other, SigmaSeries):
            return NotImplemented
        return (
            (self.metadata(), self.config_index) == (other.metadata(), other.config_index)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.sigma, other.sigma, equal_nan=True)
            and np.array_equal(self.survivors, other.survivors)
        )

    def __len__(self) -> int:
        return len(self.sigma)

    def metadata(self) -> dict:
        return {
            "coin": self.coin,
            "density": self.density,
            "ensemble_size": self.ensemble_size,
            "seed": self.seed,
            "mode": self.mode,
        }

    def at(self, t: int) -> float:
        index = np.searchsorted(self.times, t)
        if index >= len(self.times) or self.times[index] != t:
            raise KeyError(f"No sigma value at t={t}")
        return float(self.sigma[index])


@dataclass
class KwwFit:
    """Stretched exponential S(t) = exp(-(t/tau)^beta)"""
    tau: float
    beta: float
    residual: float
    points: int = 0

    def to_dict(self) -> dict:
        return {"tau": self.tau, "beta": self.beta, "residual": self.residual, "points": self.points}


def _check_mode(mode: str) -> str:
    if mode not in SIGMA_MODES:
        raise ValueError(f"Unknown sigma mode '{mode}' (expected one of: {', '.join(SIGMA_MODES)})")
    return mode


# ==================== SPREAD ====================
def sigma_of(grid, mode: str = "conditional") -> Optional[float]:
    """
    Standard deviation sqrt(<m^2 + n^2> - <m>^2 - <n>^2) of a grid.

    Conditional mode normalizes by the surviving mass first and returns None
    for a fully absorbed grid; raw mode uses the grid as is.
    """
    _check_mode(mode)
    values = grid.values
    total = float(np.sum(values))
    if mode == "conditional":
        if total <= 0.0:
            return None
        values = values / total

    axis = np.arange(-grid.half_width, grid.half_width + 1, dtype=np.float64)
    row_mass = values.sum(axis=1)
    col_mass = values.sum(axis=0)
    mean_m = float(row_mass @ axis)
    mean_n = float(col_mass @ axis)
    second = float(row_mass @ axis ** 2) + float(col_mass @ axis ** 2)
    variance = second - mean_m ** 2 - mean_n ** 2
    return math.sqrt(max(variance, 0.0))


def sigma_series(grids: Iterable, mode: str = "conditional", coin: str = "",
                 density: float = 0.0, seed: Optional[int] = None,
                 config_index: Optional[int] = None) -> SigmaSeries:
    """Single-run sigma(t) from grids at t = 0..T (the t = 0 point mass is skipped)"""
    _check_mode(mode)
    times, sigmas = [], []
    for grid in grids:
        if grid.t == 0:
            continue
        value = sigma_of(grid, mode)
        times.append(grid.t)
        sigmas.append(np.nan if value is None else value)
    sigma = np.array(sigmas, dtype=np.float64)
    return SigmaSeries(
        times=np.array(times, dtype=np.int64),
        sigma=sigma,
        survivors=(~np.isnan(sigma)).astype(np.int64),
        coin=coin,
        density=float(density),
        ensemble_size=1,
        seed=seed,
        mode=mode,
        config_index=config_index,
    )


def ensemble_sigma(runs: Sequence[SigmaSeries]) -> SigmaSeries:
    """
    Pointwise mean <sigma>(t) over trap configurations.

    Members with an absent sigma at time t are left out of that time's mean;
    ``survivors`` records how many members contributed.
    """
    if not runs:
        raise InsufficientDataError("Cannot average an empty ensemble")
    first = runs[0]
    for series in runs[1:]:
        if not np.array_equal(series.times, first.times):
            raise ValueError("Ensemble members must cover the same time steps")
        if (series.coin, series.density, series.seed, series.mode) != (first.coin, first.density, first.seed, first.mode):
            raise ValueError(
                f"Ensemble members differ in metadata: {series.metadata()} vs {first.metadata()}"
            )

    stacked = np.vstack([series.sigma for series in runs])
    weights = np.vstack([series.survivors for series in runs])
    means = np.full(stacked.shape[1], np.nan)
    counts = np.zeros(stacked.shape[1], dtype=np.int64)
    for column in range(stacked.shape[1]):
        present = ~np.isnan(stacked[:, column])
        count = int(np.sum(weights[present, column]))
        counts[column] = count
        if count:
            weighted = stacked[present, column] * weights[present, column]
            means[column] = math.fsum(weighted.tolist()) / count

    ensemble_size = int(sum(series.ensemble_size for series in runs))
    return replace(first, sigma=means, survivors=counts, ensemble_size=ensemble_size, config_index=None)


def mean_survival(runs: Sequence[Sequence[float]]) -> NDArray[np.float64]:
    """Pointwise ensemble mean of survival curves, exactly rounded sums"""
    if not len(runs):
        raise InsufficientDataError("Cannot average an empty ensemble")
    stacked = np.vstack([np.asarray(run, dtype=np.float64) for run in runs])
    return np.array([math.fsum(stacked[:, column].tolist()) / stacked.shape[0]
                     for column in range(stacked.shape[1])])


# ==================== GROWTH EXPONENTS ====================
def _fit_line(x: NDArray, y: NDArray) -> Tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def loglog_slope(series: SigmaSeries, window: Tuple[int, int]) -> float:
    """Least-squares slope of log sigma against log t over t1 <= t <= t2"""
    t_start, t_end = window
    if t_start < 1 or t_start > t_end:
        raise InsufficientDataError(f"Invalid slope window {window}")
    selected = (series.times >= t_start) & (series.times <= t_end)
    times = series.times[selected].astype(np.float64)
    sigma = series.sigma[selected]
    if len(times) < MIN_FIT_POINTS:
        raise InsufficientDataError(f"Slope window {window} holds {len(times)} points, need {MIN_FIT_POINTS}")
    if not np.all(np.isfinite(sigma)) or np.any(sigma <= 0):
        raise InsufficientDataError(f"Nonpositive or absent sigma inside window {window}")
    slope, _ = _fit_line(np.log(times), np.log(sigma))
    return slope


def local_slopes(series: SigmaSeries, window_width: int = DEFAULT_SLOPE_WINDOW) -> Tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Sliding-window log-log slopes; returns (window center times, slopes)"""
    if window_width < MIN_FIT_POINTS:
        raise InsufficientDataError(f"Window width must be at least {MIN_FIT_POINTS}, got {window_width}")
    if len(series) < window_width:
        raise InsufficientDataError(f"Series of length {len(series)} is shorter than one window ({window_width})")
    if not np.all(np.isfinite(series.sigma)) or np.any(series.sigma <= 0):
        raise InsufficientDataError("Local slopes need sigma > 0 at every step")

    log_t = np.log(series.times.astype(np.float64))
    log_sigma = np.log(series.sigma)
    half = window_width // 2
    count = len(series) - window_width + 1
    centers = series.times[half:half + count].copy()
    slopes = np.array([
        _fit_line(log_t[start:start + window_width], log_sigma[start:start + window_width])[0]
        for start in range(count)
    ])
    return centers, slopes


def decoherence_time(series: SigmaSeries, window_width: int = DEFAULT_SLOPE_WINDOW,
                     threshold: float = DECOHERENCE_SLOPE_THRESHOLD,
                     min_center: Optional[int] = None) -> Optional[int]:
    """
    Earliest window center t whose local slope is <= threshold and stays
    there for the following ``window_width`` centers; None if never.

    Centers before ``min_center`` (default: ``window_width``) are skipped,
    they only see the first few steps where sigma is still dominated by the
    initial spread.
    """
    centers, slopes = local_slopes(series, window_width)
    if min_center is None:
        min_center = window_width
    below = slopes <= threshold
    for index in range(len(slopes) - window_width):
        if centers[index] < min_center:
            continue
        if np.all(below[index:index + window_width + 1]):
            logger.debug(f"Slope fell to {slopes[index]:.4f} at t={centers[index]}")
            return int(centers[index])
    return None


# ==================== SURVIVAL ====================
def kww_generate(times, tau: float, beta: float) -> NDArray[np.float64]:
    """exp(-(t / tau)^beta)"""
    times = np.asarray(times, dtype=np.float64)
    return np.exp(-(times / tau) ** beta)


def kww_fit(survival: Sequence[float], times: Optional[Sequence[float]] = None,
            epsilon: float = KWW_EPSILON) -> KwwFit:
    """
    Fit log(-log S) = beta log t - beta log tau over points with
    epsilon < S < 1 - epsilon. ``times`` default to 1..len(survival).
    """
    survival = np.asarray(survival, dtype=np.float64)
    if times is None:
        times = np.arange(1, len(survival) + 1, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if times.shape != survival.shape:
        raise ValueError(f"Times {times.shape} and survival {survival.shape} differ in length")
    if np.any(times <= 0):
        raise FitError("Survival fit needs strictly positive times")
    if np.any(survival <= 0) or np.any(survival > 1.0 + 1e-12):
        raise FitError("Survival must lie strictly inside (0, 1]")
    if np.any(np.diff(survival) > 1e-12):
        raise FitError("Survival must be nonincreasing")
    if np.all(survival >= 1.0 - epsilon):
        raise FitError("Nothing was absorbed; survival is identically 1")

    usable = (survival > epsilon) & (survival < 1.0 - epsilon)
    points = int(np.count_nonzero(usable))
    if points < MIN_FIT_POINTS:
        raise InsufficientDataError(f"Only {points} usable survival points, need {MIN_FIT_POINTS}")

    x = np.log(times[usable])
    y = np.log(-np.log(survival[usable]))
    beta, intercept = _fit_line(x, y)
    if beta <= 0:
        raise FitError(f"Fitted stretching exponent {beta:.4g} is not positive")
    residual = float(np.sqrt(np.mean((y - (beta * x + intercept)) ** 2)))
    tau = math.exp(-intercept / beta)
    logger.debug(f"KWW fit over {points} points: tau={tau:.6g} beta={beta:.6g} residual={residual:.3g}")
    return KwwFit(tau=tau, beta=beta, residual=residual, points=points)


# ==================== CSV EXPORT ====================
def _format_float(value: float) -> str:
    return "" if math.isnan(value) else format(float(value), SERIES_FLOAT_FORMAT)


def write_sigma_csv(series: SigmaSeries, path) -> Path:
    """``t,sigma,survivors`` rows; an absent sigma is written as an empty field"""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "sigma", "survivors"])
        for t, value, count in zip(series.times, series.sigma, series.survivors):
            writer.writerow([int(t), _format_float(value), int(count)])
    return path


def read_sigma_csv(path, **metadata) -> SigmaSeries:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Sigma file not found: {path}")
    times, sigmas, counts = [], [], []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            times.append(int(row["t"]))
            sigmas.append(float(row["sigma"]) if row["sigma"] else np.nan)
            counts.append(int(row["survivors"]))
    return SigmaSeries(np.array(times, dtype=np.int64), np.array(sigmas, dtype=np.float64),
                       np.array(counts, dtype=np.int64), **metadata)


def write_survival_csv(times: Sequence[int], survival: Sequence[float], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "survival"])
        for t, value in zip(times, survival):
            writer.writerow([int(t), _format_float(value)])
    return path


def read_survival_csv(path) -> Tuple[NDArray[np.int64], NDArray[np.float64]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Survival file not found: {path}")
    times, values = [], []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            times.append(int(row["t"]))
            values.append(float(row["survival"]))
    return np.array(times, dtype=np.int64), np.array(values, dtype=np.float64)
