"""
Trap Lattice
Frozen random configurations of completely absorbing traps on the
[-L, L] x [-L, L] lattice.

Random stream layout (results format version 1):
    generator  numpy Philox4x64 (counter based, 256-bit counter, 128-bit key)
    key        np.random.SeedSequence(entropy=seed, spawn_key=(r,))
    counter    one uniform double per site, sites visited in row-major order
               of (m, n) from (-L, -L) to (L, L); the origin consumes its
               draw but is never trapped
    rule       site trapped iff uniform < p
A mask is therefore a pure function of (L, p, seed, r), independent of the
order or process in which ensemble members are generated.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from WalkErrors import DimensionMismatchError, InvalidDensityError, TrapPlacementError

logger = logging.getLogger("trap_lattice")

MASK_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class TrapMask:
    """Boolean trap grid; ``trapped[i, j]`` is site (m, n) = (i - L, j - L)"""
    half_width: int
    trapped: NDArray[np.bool_] = field(repr=False)
    density: float
    seed: Optional[int] = None
    config_index: int = 0

    def __post_init__(self):
        size = 2 * self.half_width + 1
        if self.trapped.shape != (size, size):
            raise DimensionMismatchError(
                f"Trap grid shape {self.trapped.shape} does not match half width {self.half_width}"
            )
        if self.trapped[self.half_width, self.half_width]:
            raise TrapPlacementError("The origin can never hold a trap")
        self.trapped.setflags(write=False)

    def __eq__(self, other) -> bool:
        """Masks are equal when they trap the same sites on the same lattice"""
        if not isinstance(other, TrapMask):
            return NotImplemented
        return self.half_width == other.half_width and np.array_equal(self.trapped, other.trapped)

    def __hash__(self) -> int:
        return hash((self.half_width, self.trapped.tobytes()))

    @property
    def size(self) -> int:
        return 2 * self.half_width + 1

    def sites(self) -> List[Tuple[int, int]]:
        """Trapped (m, n) coordinates in row-major order"""
        rows, cols = np.nonzero(self.trapped)
        return [(int(i) - self.half_width, int(j) - self.half_width) for i, j in zip(rows, cols)]


def _site_stream(seed: int, config_index: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(config_index),))
    return np.random.Generator(np.random.Philox(sequence))


def generate_traps(half_width: int, density: float, seed: int, config_index: int) -> TrapMask:
    """Place a Bernoulli(p) trap on every site except the origin"""
    if not 0.0 <= density <= 1.0:
        logger.error(f"Invalid trap density: {density}")
        raise InvalidDensityError(f"Trap density must lie in [0, 1], got {density}")
    if half_width < 0:
        raise ValueError(f"Half width must be nonnegative, got {half_width}")
    if config_index < 0:
        raise ValueError(f"Configuration index must be nonnegative, got {config_index}")

    size = 2 * half_width + 1
    draws = _site_stream(seed, config_index).random((size, size))
    trapped = draws < density
    trapped[half_width, half_width] = False

    logger.debug(
        f"Generated mask L={half_width} p={density} seed={seed} r={config_index}: "
        f"{int(trapped.sum())} traps"
    )
    return TrapMask(half_width, trapped, float(density), int(seed), int(config_index))


def empty_mask(half_width: int) -> TrapMask:
    """Trap-free mask (p = 0)"""
    size = 2 * half_width + 1
    return TrapMask(half_width, np.zeros((size, size), dtype=bool), 0.0)


def trap_count(mask: TrapMask) -> int:
    return int(np.count_nonzero(mask.trapped))


def mask_from_sites(half_width: int, sites, density: Optional[float] = None,
                    seed: Optional[int] = None, config_index: int = 0) -> TrapMask:
    """Build a mask from explicit (m, n) trap coordinates"""
    size = 2 * half_width + 1
    trapped = np.zeros((size, size), dtype=bool)
    for m, n in sites:
        if max(abs(m), abs(n)) > half_width:
            raise DimensionMismatchError(f"Trap site ({m}, {n}) lies outside half width {half_width}")
        trapped[m + half_width, n + half_width] = True
    if density is None:
        density = float(trapped.sum()) / (size * size - 1) if size > 1 else 0.0
    return TrapMask(half_width, trapped, float(density), seed, config_index)


# ==================== CSV ARCHIVE ====================
def write_mask_csv(mask: TrapMask, path) -> Path:
    """Write trapped sites as ``m,n`` rows"""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["m", "n"])
        writer.writerows(mask.sites())
    logger.debug(f"Wrote {trap_count(mask)} trap sites to {path}")
    return path


def read_mask_csv(path, half_width: int, density: Optional[float] = None,
                  seed: Optional[int] = None, config_index: int = 0) -> TrapMask:
    """Replay an archived mask onto a lattice of the given half width"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Mask file not found: {path}")
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        sites = [(int(row["m"]), int(row["n"])) for row in reader]
    logger.info(f"Loaded {len(sites)} trap sites from {path}")
    return mask_from_sites(half_width, sites, density, seed, config_index)
