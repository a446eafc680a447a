"""Unitary DFT engine, OFDM framing and cyclic prefix handling.

Transforms use numpy.fft with orthonormal scaling, which handles
power-of-two and composite sizes (6400 = 2^8 * 5^2) alike.

Example:
    >>> import numpy as np
    >>> from src.phy.ofdm import OfdmGrid, ofdm_demodulate, ofdm_modulate
    >>> grid = OfdmGrid(n_subcarriers=64, cp_len=16)
    >>> signal = ofdm_modulate(np.ones(100, dtype=complex), grid)
    >>> signal.ofdm_symbols, signal.pad_symbols
    (2, 28)
    >>> np.allclose(ofdm_demodulate(signal.samples, grid, 100), 1.0)
    True
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from src.phy.common import ComplexArray, RaggedBlockError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OfdmGrid:
    """OFDM numerology.

    Attributes:
        n_subcarriers: DFT size N.
        cp_len: Cyclic prefix length in samples, 0 <= cp_len <= N.
    """

    n_subcarriers: int = 6400
    cp_len: int = 1280

    def __post_init__(self) -> None:
        if self.n_subcarriers < 1:
            raise ValueError(f"n_subcarriers must be >= 1, got {self.n_subcarriers}")
        if not 0 <= self.cp_len <= self.n_subcarriers:
            raise ValueError(
                f"cp_len must be in [0, {self.n_subcarriers}], got {self.cp_len}"
            )

    @property
    def symbol_len(self) -> int:
        """Time samples per OFDM symbol including the prefix."""
        return self.n_subcarriers + self.cp_len


@dataclass(frozen=True, eq=False)
class OfdmSignal:
    """Serial time-domain samples and their framing record."""

    samples: ComplexArray
    ofdm_symbols: int
    pad_symbols: int


def _check_length(x: npt.NDArray[np.complex128]) -> None:
    if x.shape[-1] == 0:
        raise ValueError("DFT length must be >= 1")


def idft(freq: npt.ArrayLike) -> ComplexArray:
    """Unitary inverse DFT along the last axis (1/sqrt(N) scaling)."""
    x = np.asarray(freq, dtype=np.complex128)
    _check_length(x)
    return np.fft.ifft(x, norm="ortho")


def dft(time: npt.ArrayLike) -> ComplexArray:
    """Unitary forward DFT along the last axis."""
    x = np.asarray(time, dtype=np.complex128)
    _check_length(x)
    return np.fft.fft(x, norm="ortho")


def add_cp(sym: npt.ArrayLike, cp_len: int) -> ComplexArray:
    """Prepend the last cp_len samples of each row.

    Raises:
        ValueError: cp_len is negative or longer than the symbol.
    """
    x = np.asarray(sym, dtype=np.complex128)
    n = x.shape[-1]
    if not 0 <= cp_len <= n:
        raise ValueError(f"cp_len {cp_len} out of range for symbol length {n}")
    if cp_len == 0:
        return x.copy()
    return np.concatenate([x[..., n - cp_len :], x], axis=-1)


def remove_cp(sym: npt.ArrayLike, cp_len: int) -> ComplexArray:
    """Drop the first cp_len samples of each row.

    Raises:
        ValueError: The row is not longer than cp_len.
    """
    x = np.asarray(sym, dtype=np.complex128)
    if cp_len < 0 or x.shape[-1] <= cp_len:
        raise ValueError(f"symbol length {x.shape[-1]} must exceed cp_len {cp_len}")
    return x[..., cp_len:].copy()


def ofdm_modulate(symbols: npt.ArrayLike, grid: OfdmGrid) -> OfdmSignal:
    """Serial-to-parallel, IDFT and CP insertion.

    The final OFDM symbol is zero-padded to a full row of subcarriers.
    """
    x = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    n = grid.n_subcarriers
    rows = max(1, -(-x.size // n))
    pad = rows * n - x.size
    if pad:
        x = np.concatenate([x, np.zeros(pad, dtype=np.complex128)])
    time = add_cp(idft(x.reshape(rows, n)), grid.cp_len)
    return OfdmSignal(samples=time.reshape(-1), ofdm_symbols=rows, pad_symbols=pad)


def ofdm_demodulate(samples: npt.ArrayLike, grid: OfdmGrid, n_used: int) -> ComplexArray:
    """CP removal, DFT and parallel-to-serial, truncated to n_used symbols.

    Raises:
        RaggedBlockError: Sample count is not a multiple of N + cp_len.
    """
    x = np.asarray(samples, dtype=np.complex128).reshape(-1)
    if x.size == 0 or x.size % grid.symbol_len:
        raise RaggedBlockError("ragged OFDM sample block", x.size, grid.symbol_len)
    rows = x.reshape(-1, grid.symbol_len)
    freq = dft(remove_cp(rows, grid.cp_len)).reshape(-1)
    if n_used > freq.size:
        raise ValueError(f"n_used {n_used} exceeds the {freq.size} demodulated symbols")
    return freq[:n_used]
