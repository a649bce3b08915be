"""
Quantum Walk Errors
Exception hierarchy shared by the simulator, statistics and sweep modules.
"""


class QuantumWalkError(Exception):
    """Base class for every error raised by the simulator"""


class LatticeBoundaryError(QuantumWalkError, ValueError):
    """The light cone would leave the finite lattice (lattice sized too small)"""


class DimensionMismatchError(QuantumWalkError, ValueError):
    """State, mask or grid are defined on different lattice spans"""


class InvalidDensityError(QuantumWalkError, ValueError):
    """Trap density outside [0, 1]"""


class TrapPlacementError(QuantumWalkError, ValueError):
    """Trap on a forbidden site (the walker's starting site)"""


class InsufficientDataError(QuantumWalkError, ValueError):
    """Too few usable points for a slope, window or fit"""


class FitError(QuantumWalkError, ValueError):
    """Survival series cannot be fitted (nothing absorbed, not monotone, ...)"""


class ConfigError(QuantumWalkError, ValueError):
    """Invalid sweep configuration or unknown preset/coin name"""


class OutputDirectoryError(QuantumWalkError, OSError):
    """Sweep output directory cannot be created or written"""