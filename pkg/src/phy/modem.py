"""Constellation mapping and hard demapping.

Six unit-energy schemes: QPSK, 8-PSK, 8-QAM (4x2 rectangular), 16-QAM,
32-QAM (cross) and 64-QAM. Points are stored in label order, so index i
of `ModulationScheme.points` is the point carrying label i (MSB first).

Example:
    >>> from src.phy.modem import demap_hard, get_scheme, map_bits
    >>> qpsk = get_scheme("qpsk")
    >>> block = map_bits([0, 0, 1, 1], qpsk)
    >>> demap_hard(block.symbols, qpsk).tolist()
    [0, 0, 1, 1]
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cache
from typing import Literal, get_args

import numpy as np
import numpy.typing as npt

from src.phy.common import BitBlock, ComplexArray, as_bits

logger = logging.getLogger(__name__)

ModulationName = Literal["qpsk", "8psk", "8qam", "16qam", "32qam", "64qam"]
MODULATIONS: tuple[ModulationName, ...] = get_args(ModulationName)

DISPLAY_NAMES: dict[str, str] = {
    "qpsk": "QPSK",
    "8psk": "8-PSK",
    "8qam": "8-QAM",
    "16qam": "16-QAM",
    "32qam": "32-QAM",
    "64qam": "64-QAM",
}

# Demapping distance matrices are built in slices of this many symbols.
DEMAP_CHUNK = 16384


@dataclass(frozen=True, eq=False)
class ModulationScheme:
    """Labelled constellation.

    Attributes:
        name: Scheme identifier (e.g. "16qam").
        bits_per_symbol: Label width.
        points: Complex points indexed by label value.
    """

    name: str
    bits_per_symbol: int
    points: ComplexArray

    def __post_init__(self) -> None:
        if self.points.shape != (1 << self.bits_per_symbol,):
            raise ValueError(
                f"{self.name}: expected {1 << self.bits_per_symbol} points, "
                f"got {self.points.shape}"
            )

    @property
    def order(self) -> int:
        return 1 << self.bits_per_symbol

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES.get(self.name, self.name)

    def labels(self) -> list[tuple[int, ...]]:
        """Label bit tuples in point order."""
        k = self.bits_per_symbol
        return [tuple((i >> (k - 1 - b)) & 1 for b in range(k)) for i in range(self.order)]


@dataclass(frozen=True, eq=False)
class SymbolBlock:
    """Mapped symbols plus the zero bits appended to fill the last symbol."""

    symbols: ComplexArray
    scheme: ModulationScheme
    pad_bits: int = 0

    def __len__(self) -> int:
        return int(self.symbols.size)


def _gray(n: npt.NDArray[np.int64]) -> npt.NDArray[np.int64]:
    return n ^ (n >> 1)


def _gray_pam(bits: int) -> npt.NDArray[np.float64]:
    """Amplitude for each label of a Gray-coded 2**bits-PAM, by label value.

    Label 0 sits on the largest positive level.
    """
    levels = 1 << bits
    index = np.arange(levels)
    amplitudes = np.empty(levels, dtype=np.float64)
    amplitudes[_gray(index)] = (levels - 1) - 2.0 * index
    return amplitudes


def _normalise(points: ComplexArray) -> ComplexArray:
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


def _square_qam(bits: int) -> ComplexArray:
    half = bits // 2
    pam = _gray_pam(half)
    labels = np.arange(1 << bits)
    i_part = pam[labels >> half]
    q_part = pam[labels & ((1 << half) - 1)]
    return _normalise(i_part + 1j * q_part)


def _qpsk() -> ComplexArray:
    return _square_qam(2)


def _psk8() -> ComplexArray:
    labels = np.arange(8)
    points = np.empty(8, dtype=np.complex128)
    # position k on the circle carries label gray(k)
    points[_gray(labels)] = np.exp(1j * np.pi / 4 * labels)
    return points


def _qam8() -> ComplexArray:
    labels = np.arange(8)
    i_part = _gray_pam(2)[labels >> 1]
    q_part = 1.0 - 2.0 * (labels & 1)
    return _normalise(i_part + 1j * q_part)


# Quadrant-local label for the 8 points of (|I|, |Q|) in {1,3,5}^2 minus (5,5).
_CROSS_INNER: dict[tuple[int, int], int] = {
    (1, 1): 0b000,
    (3, 1): 0b001,
    (5, 1): 0b011,
    (1, 3): 0b100,
    (3, 3): 0b101,
    (5, 3): 0b111,
    (1, 5): 0b110,
    (3, 5): 0b010,
}


def _qam32() -> ComplexArray:
    points = np.empty(32, dtype=np.complex128)
    for (ai, aq), inner in _CROSS_INNER.items():
        for sign_i in (0, 1):
            for sign_q in (0, 1):
                label = (sign_i << 4) | (sign_q << 3) | inner
                points[label] = (1 - 2 * sign_i) * ai + 1j * (1 - 2 * sign_q) * aq
    return _normalise(points)


_BUILDERS: dict[str, tuple[int, Callable[[], ComplexArray]]] = {
    "qpsk": (2, _qpsk),
    "8psk": (3, _psk8),
    "8qam": (3, _qam8),
    "16qam": (4, lambda: _square_qam(4)),
    "32qam": (5, _qam32),
    "64qam": (6, lambda: _square_qam(6)),
}


@cache
def get_scheme(name: str) -> ModulationScheme:
    """Look up a modulation scheme by name.

    Raises:
        ValueError: Unknown scheme name.
    """
    key = name.strip().lower().replace("-", "")
    if key not in _BUILDERS:
        raise ValueError(f"unknown modulation '{name}', expected one of {', '.join(MODULATIONS)}")
    bits, builder = _BUILDERS[key]
    points = builder()
    points.setflags(write=False)
    return ModulationScheme(name=key, bits_per_symbol=bits, points=points)


def map_bits(bits: npt.ArrayLike, scheme: ModulationScheme) -> SymbolBlock:
    """Map bit groups to constellation points, MSB first.

    Zero bits are appended to complete the last group; their count is
    recorded in the returned block.
    """
    arr = as_bits(bits)
    k = scheme.bits_per_symbol
    pad = (-arr.size) % k
    if pad:
        arr = np.concatenate([arr, np.zeros(pad, dtype=np.uint8)])
    weights = 1 << np.arange(k - 1, -1, -1)
    labels = arr.reshape(-1, k).astype(np.int64) @ weights
    return SymbolBlock(symbols=scheme.points[labels].copy(), scheme=scheme, pad_bits=pad)


def demap_labels(received: npt.ArrayLike, scheme: ModulationScheme) -> npt.NDArray[np.int64]:
    """Nearest-point labels; ties go to the smallest label."""
    values = np.asarray(received, dtype=np.complex128).reshape(-1)
    labels = np.empty(values.size, dtype=np.int64)
    for start in range(0, values.size, DEMAP_CHUNK):
        chunk = values[start : start + DEMAP_CHUNK]
        distances = np.abs(chunk[:, np.newaxis] - scheme.points[np.newaxis, :]) ** 2
        labels[start : start + chunk.size] = np.argmin(distances, axis=1)
    return labels


def demap_hard(received: npt.ArrayLike, scheme: ModulationScheme) -> BitBlock:
    """Minimum-distance hard decisions, returned as label bits MSB first."""
    labels = demap_labels(received, scheme)
    k = scheme.bits_per_symbol
    shifts = np.arange(k - 1, -1, -1)
    return ((labels[:, np.newaxis] >> shifts) & 1).astype(np.uint8).reshape(-1)
