"""
Quantum Coins
The three two-dimensional coin unitaries (Hadamard, Fourier, Grover) acting on
the four-dimensional coin space, and the initial coin states that give each
walk its maximal spread from the origin.

Basis order is fixed as (00, 01, 10, 11) everywhere: row index = outgoing
coin state |jk>, column index = incoming |j'k'>.
"""

import logging
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from WalkErrors import ConfigError

logger = logging.getLogger("quantum_coins")

__all__ = [
    "CoinKind",
    "coin_from_name",
    "coin_matrix",
    "initial_state",
    "apply_coin_to_state",
    "is_unitary",
]

COIN_DIM = 4


class CoinKind(str, Enum):
    """Coin selector; values are the names accepted by the CLI and config files"""
    HADAMARD = "hadamard"
    FOURIER = "fourier"
    GROVER = "grover"


def coin_from_name(name: "str | CoinKind") -> CoinKind:
    """Parse a coin name case-insensitively"""
    if isinstance(name, CoinKind):
        return name
    try:
        return CoinKind(str(name).strip().lower())
    except ValueError:
        valid = ", ".join(k.value for k in CoinKind)
        logger.error(f"Unknown coin name: {name!r}")
        raise ConfigError(f"Unknown coin '{name}' (expected one of: {valid})") from None


_MATRICES = {
    CoinKind.HADAMARD: [
        [1, 1, 1, 1],
        [1, -1, 1, -1],
        [1, 1, -1, -1],
        [1, -1, -1, 1],
    ],
    CoinKind.FOURIER: [
        [1, 1, 1, 1],
        [1, 1j, -1, -1j],
        [1, -1, 1, -1],
        [1, -1j, -1, 1j],
    ],
    CoinKind.GROVER: [
        [-1, 1, 1, 1],
        [1, -1, 1, 1],
        [1, 1, -1, 1],
        [1, 1, 1, -1],
    ],
}

_SQRT_HALF = 1.0 / np.sqrt(2.0)

_INITIAL_STATES = {
    CoinKind.HADAMARD: [1, 1j, -1j, 1],
    CoinKind.FOURIER: [1, (1 - 1j) * _SQRT_HALF, 1, -(1 - 1j) * _SQRT_HALF],
    CoinKind.GROVER: [1, -1, -1, 1],
}


def coin_matrix(kind: "CoinKind | str") -> NDArray[np.complex128]:
    """
    Return the 4x4 coin unitary for ``kind``.

    Each call returns a fresh array, so callers may not mutate a shared table.
    """
    kind = coin_from_name(kind)
    return np.array(_MATRICES[kind], dtype=np.complex128) / 2.0


def initial_state(kind: "CoinKind | str") -> NDArray[np.complex128]:
    """Return the unit-norm initial coin state paired with ``kind``"""
    kind = coin_from_name(kind)
    return np.array(_INITIAL_STATES[kind], dtype=np.complex128) / 2.0


def apply_coin_to_state(matrix: NDArray[np.complex128],
                        state: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Matrix-vector product of a coin with a single coin-space vector"""
    matrix = np.asarray(matrix, dtype=np.complex128)
    state = np.asarray(state, dtype=np.complex128)
    if matrix.shape != (COIN_DIM, COIN_DIM) or state.shape != (COIN_DIM,):
        raise ValueError(
            f"Expected a {COIN_DIM}x{COIN_DIM} coin and a length-{COIN_DIM} state, "
            f"got {matrix.shape} and {state.shape}"
        )
    return matrix @ state


def is_unitary(matrix: NDArray[np.complex128], atol: float = 1e-12) -> bool:
    """Check C C^dagger = I elementwise within ``atol``"""
    matrix = np.asarray(matrix)
    identity = np.eye(matrix.shape[0], dtype=np.complex128)
    return bool(np.allclose(matrix @ matrix.conj().T, identity, rtol=0.0, atol=atol))
