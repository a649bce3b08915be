"""
Classical Walk
Exact classical baseline on the same diagonal geometry as the quantum shift:
each step moves to one of (m +/- 1, n +/- 1) with probability 1/4. The
distribution is propagated by convolution, so the baseline carries no
sampling noise and sigma_cl(t) = sqrt(2t) holds to rounding error.
"""

import logging
from typing import Iterator, List, Optional

import numpy as np

from LatticeWalkEngine import ProbabilityGrid, check_light_cone, shift_grid
from TrapLattice import TrapMask
from WalkErrors import DimensionMismatchError
from WalkStatistics import SigmaSeries, sigma_series

logger = logging.getLogger("classical_walk")

# A classical state has exactly the fields of a probability grid
ClassicalState = ProbabilityGrid

_DIAGONAL_MOVES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def new_classical(steps: int, half_width: Optional[int] = None) -> ClassicalState:
    """Point mass at the origin on a lattice sized for ``steps`` steps"""
    if half_width is None:
        half_width = steps + 1
    size = 2 * half_width + 1
    values = np.zeros((size, size), dtype=np.float64)
    values[half_width, half_width] = 1.0
    return ClassicalState(half_width, values, 0)


def classical_step(state: ClassicalState, traps: Optional[TrapMask] = None) -> ClassicalState:
    check_light_cone(state.t, state.half_width)
    moved = np.empty_like(state.values)
    result = np.zeros_like(state.values)
    for delta_m, delta_n in _DIAGONAL_MOVES:
        result += shift_grid(state.values, delta_m, delta_n, moved)
    result *= 0.25
    if traps is not None:
        if traps.half_width != state.half_width:
            raise DimensionMismatchError(
                f"Trap mask half width {traps.half_width} differs from lattice half width {state.half_width}"
            )
        result[traps.trapped] = 0.0
    return ClassicalState(state.half_width, result, state.t + 1)


def iter_classical(steps: int, traps: Optional[TrapMask] = None) -> Iterator[ClassicalState]:
    state = new_classical(steps, traps.half_width if traps is not None else None)
    yield state
    for _ in range(steps):
        state = classical_step(state, traps)
        yield state


def classical_run(steps: int, traps: Optional[TrapMask] = None) -> List[ClassicalState]:
    return list(iter_classical(steps, traps))


def classical_survival(steps: int, traps: Optional[TrapMask] = None) -> np.ndarray:
    """Unabsorbed mass at t = 0..steps for the classical walker"""
    return np.array([float(np.sum(state.values)) for state in iter_classical(steps, traps)])


def classical_sigma(steps: int) -> SigmaSeries:
    """Trap-free classical sigma(t), t = 1..steps, by exact convolution"""
    if steps < 1:
        raise ValueError(f"Classical sigma needs at least one step, got {steps}")
    series = sigma_series(iter_classical(steps), mode="conditional", coin="classical", density=0.0)
    logger.debug(f"Classical baseline sigma({steps}) = {series.sigma[-1]:.6f}")
    return series
