"""
Lattice Walk Engine
Evolves the walker amplitude tensor A[j, k, m, n] on a finite
[-L, L] x [-L, L] lattice: coin at every site, conditional shift, then
annihilation of all amplitude that arrived on a trap.

Storage is one contiguous complex grid per coin component, shape
(2, 2, 2L+1, 2L+1), index (i, j) <-> site (m, n) = (i - L, j - L).
`iter_walk` double-buffers the amplitude grids between steps.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from QuantumCoins import CoinKind, coin_from_name, coin_matrix, initial_state
from TrapLattice import TrapMask, empty_mask
from WalkErrors import DimensionMismatchError, LatticeBoundaryError

logger = logging.getLogger("walk_engine")

GRID_FLOAT_FORMAT = ".17g"


# ==================== DOMAIN TYPES ====================
@dataclass
class WalkerState:
    """Pure-state amplitudes of the walker at step ``t``"""
    half_width: int
    amplitudes: NDArray[np.complex128] = field(repr=False)
    t: int = 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, WalkerState):
            return NotImplemented
        return ((self.half_width, self.t) == (other.half_width, other.t)
                and np.array_equal(self.amplitudes, other.amplitudes))

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    def norm_squared(self) -> float:
        return float(np.sum(self.amplitudes.real ** 2 + self.amplitudes.imag ** 2))


@dataclass
class ProbabilityGrid:
    """P(m, n) at time ``t``; total mass is the survival probability"""
    half_width: int
    values: NDArray[np.float64] = field(repr=False)
    t: int = 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbabilityGrid):
            return NotImplemented
        return ((self.half_width, self.t) == (other.half_width, other.t)
                and np.array_equal(self.values, other.values))

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    def at(self, m: int, n: int) -> float:
        return float(self.values[m + self.half_width, n + self.half_width])


def lattice_axis(half_width: int) -> NDArray[np.int64]:
    """Coordinates -L..L along one lattice axis"""
    return np.arange(-half_width, half_width + 1)


# (destination slice, source slice) along one axis for a displacement of +1 / -1
_AXIS_SHIFT = {
    1: (slice(1, None), slice(None, -1)),
    -1: (slice(None, -1), slice(1, None)),
}


def shift_grid(source: NDArray, delta_m: int, delta_n: int, out: NDArray) -> NDArray:
    """Move every entry of a 2D grid by (delta_m, delta_n) with no wraparound"""
    dst_m, src_m = _AXIS_SHIFT[delta_m]
    dst_n, src_n = _AXIS_SHIFT[delta_n]
    out.fill(0)
    out[dst_m, dst_n] = source[src_m, src_n]
    return out


def coin_displacement(j: int, k: int) -> Tuple[int, int]:
    """Coin component |j,k> moves the walker by ((-1)^j, (-1)^k)"""
    return (-1) ** j, (-1) ** k


def check_light_cone(t: int, half_width: int) -> None:
    """After one more step the support reaches max(|m|,|n|) = t + 1; it must fit on the lattice"""
    if t + 1 > half_width:
        logger.error(f"Light cone leaves the lattice: t={t}, L={half_width}")
        raise LatticeBoundaryError(
            f"Step from t={t} would reach radius {t + 1} on a lattice of half width {half_width}"
        )


# ==================== OPERATIONS ====================
def new_walker(kind: "CoinKind | str", steps: int, half_width: Optional[int] = None) -> WalkerState:
    """
    Walker at the origin carrying the maximal-spread initial coin state.

    The lattice half width defaults to steps + 1; an explicit ``half_width``
    must still hold ``steps`` steps of light cone.
    """
    if steps < 0:
        raise ValueError(f"Step count must be nonnegative, got {steps}")
    if half_width is None:
        half_width = steps + 1
    elif half_width < steps:
        raise LatticeBoundaryError(f"Half width {half_width} cannot hold {steps} steps")

    size = 2 * half_width + 1
    amplitudes = np.zeros((2, 2, size, size), dtype=np.complex128)
    amplitudes[:, :, half_width, half_width] = initial_state(coin_from_name(kind)).reshape(2, 2)
    return WalkerState(half_width, amplitudes, 0)


def apply_coin(state: WalkerState, coin: NDArray[np.complex128],
               out: Optional[NDArray[np.complex128]] = None) -> WalkerState:
    """Apply (I_lattice x C) to every site at once"""
    size = state.size
    flat = state.amplitudes.reshape(4, size * size)
    if out is None:
        out = np.empty_like(state.amplitudes)
    np.matmul(coin, flat, out=out.reshape(4, size * size))
    return WalkerState(state.half_width, out, state.t)


def apply_shift(state: WalkerState, out: Optional[NDArray[np.complex128]] = None) -> WalkerState:
    """Move component (j, k) from (m, n) to (m + (-1)^j, n + (-1)^k); advances t"""
    check_light_cone(state.t, state.half_width)
    if out is None:
        out = np.empty_like(state.amplitudes)
    for j in (0, 1):
        for k in (0, 1):
            delta_m, delta_n = coin_displacement(j, k)
            shift_grid(state.amplitudes[j, k], delta_m, delta_n, out[j, k])
    return WalkerState(state.half_width, out, state.t + 1)


def project_traps(state: WalkerState, traps: TrapMask) -> WalkerState:
    """Zero all four coin amplitudes on every trap site (in place)"""
    if traps.half_width != state.half_width:
        raise DimensionMismatchError(
            f"Trap mask half width {traps.half_width} differs from walker half width {state.half_width}"
        )
    state.amplitudes[:, :, traps.trapped] = 0
    return state


def step(state: WalkerState, coin: NDArray[np.complex128], traps: TrapMask,
         scratch: Optional[NDArray[np.complex128]] = None,
         out: Optional[NDArray[np.complex128]] = None) -> WalkerState:
    """
    One walk iteration: coin, shift, then trap projection.

    ``scratch`` receives the coined amplitudes and ``out`` the result; both
    default to fresh arrays and must not alias ``state.amplitudes``.
    """
    if traps.half_width != state.half_width:
        raise DimensionMismatchError(
            f"Trap mask half width {traps.half_width} differs from walker half width {state.half_width}"
        )
    coined = apply_coin(state, coin, out=scratch)
    shifted = apply_shift(coined, out=out)
    return project_traps(shifted, traps)


def measure(state: WalkerState) -> ProbabilityGrid:
    """P(m, n) = sum over j, k of |A(j, k, m, n)|^2"""
    amplitudes = state.amplitudes
    values = np.sum(amplitudes.real ** 2 + amplitudes.imag ** 2, axis=(0, 1))
    return ProbabilityGrid(state.half_width, values, state.t)


def survival_probability(grid: ProbabilityGrid) -> float:
    return float(np.sum(grid.values))


def mean_position(grid: ProbabilityGrid) -> Tuple[float, float]:
    """(<m>, <n>) of the unnormalized distribution"""
    axis = lattice_axis(grid.half_width)
    return float(np.sum(grid.values.sum(axis=1) * axis)), float(np.sum(grid.values.sum(axis=0) * axis))


def iter_walk(kind: "CoinKind | str", steps: int, traps: Optional[TrapMask] = None,
              half_width: Optional[int] = None) -> Iterator[ProbabilityGrid]:
    """Yield the probability grid at t = 0..steps, reusing two amplitude buffers"""
    kind = coin_from_name(kind)
    state = new_walker(kind, steps, half_width)
    if traps is None:
        traps = empty_mask(state.half_width)
    elif traps.half_width != state.half_width:
        raise DimensionMismatchError(
            f"Trap mask half width {traps.half_width} differs from lattice half width {state.half_width}"
        )
    coin = coin_matrix(kind)
    scratch = np.empty_like(state.amplitudes)
    spare = np.empty_like(state.amplitudes)

    yield measure(state)
    for _ in range(steps):
        previous = state.amplitudes
        state = step(state, coin, traps, scratch=scratch, out=spare)
        spare = previous
        yield measure(state)


def run(kind: "CoinKind | str", steps: int, traps: Optional[TrapMask] = None,
        half_width: Optional[int] = None) -> List[ProbabilityGrid]:
    """All grids t = 0..steps of one deterministic walk"""
    grids = list(iter_walk(kind, steps, traps, half_width))
    logger.debug(f"Walk {coin_from_name(kind).value} finished {steps} steps, survival={survival_probability(grids[-1]):.6f}")
    return grids


# ==================== CSV EXPORT ====================
def write_grid_csv(grid: ProbabilityGrid, path) -> Path:
    """``m,n,p`` rows for every nonzero entry, 17 significant digits"""
    path = Path(path)
    rows, cols = np.nonzero(grid.values)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["m", "n", "p"])
        for i, j in zip(rows, cols):
            writer.writerow([int(i) - grid.half_width, int(j) - grid.half_width,
                             format(float(grid.values[i, j]), GRID_FLOAT_FORMAT)])
    return path


def read_grid_csv(path, half_width: int, t: int = 0) -> ProbabilityGrid:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Grid file not found: {path}")
    size = 2 * half_width + 1
    values = np.zeros((size, size), dtype=np.float64)
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            m, n = int(row["m"]), int(row["n"])
            if max(abs(m), abs(n)) > half_width:
                raise DimensionMismatchError(f"Grid entry ({m}, {n}) lies outside half width {half_width}")
            values[m + half_width, n + half_width] = float(row["p"])
    return ProbabilityGrid(half_width, values, t)


def write_heightmap_csv(grid: ProbabilityGrid, path) -> Path:
    """Full 2D matrix: header ``m\\n,-L..L``, one row per m"""
    path = Path(path)
    axis = lattice_axis(grid.half_width)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["m\\n"] + [int(n) for n in axis])
        for m, row in zip(axis, grid.values):
            writer.writerow([int(m)] + [format(float(v), GRID_FLOAT_FORMAT) for v in row])
    return path
