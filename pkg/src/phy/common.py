"""Common types for physical-layer modules.

Array aliases shared by the fec, spread, modem, ofdm, mimo and channel
modules, plus the exception hierarchy they raise.

Example:
    >>> import numpy as np
    >>> from src.phy.common import as_bits
    >>> as_bits([1, 0, 1]).dtype
    dtype('uint8')
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

BitBlock = npt.NDArray[np.uint8]
RealArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]


class PhyError(ValueError):
    """Base class for physical-layer contract violations."""

    pass


class EmptyInputError(PhyError):
    """Raised when an operation that needs data receives an empty block."""

    def __init__(self) -> None:
        super().__init__("empty input")


class UnpairedBitsError(PhyError):
    """Raised when a rate-1/2 decoder receives an odd number of bits."""

    def __init__(self, length: int) -> None:
        self.length = length
        super().__init__(f"unpaired output bits (length {length})")


class OracleTooLargeError(PhyError):
    """Raised when exhaustive decoding would enumerate too many messages."""

    def __init__(self, msg_len: int, limit: int) -> None:
        self.msg_len = msg_len
        self.limit = limit
        super().__init__(f"oracle too large: msg_len={msg_len} exceeds {limit}")


class DegenerateStateError(PhyError):
    """Raised when an LFSR is seeded with the all-zero state."""

    def __init__(self) -> None:
        super().__init__("degenerate LFSR state")


class RaggedBlockError(PhyError):
    """Raised when a block length is not a multiple of its framing unit.

    Example:
        >>> raise RaggedBlockError("ragged chip block", length=13, unit=8)
    """

    def __init__(self, what: str, length: int, unit: int) -> None:
        self.length = length
        self.unit = unit
        super().__init__(f"{what}: length {length} is not a multiple of {unit}")


class SingularChannelError(PhyError):
    """Raised when H^H H cannot be inverted reliably.

    Attributes:
        indices: Flat indices of the offending matrices in a stacked input.
    """

    def __init__(self, indices: Sequence[int], condition: float) -> None:
        self.indices = list(indices)
        self.condition = condition
        super().__init__(
            f"singular channel ({len(self.indices)} block(s), condition {condition:.3g})"
        )


def as_bits(bits: npt.ArrayLike) -> BitBlock:
    """Convert array-like input to a flat uint8 bit array.

    Args:
        bits: Sequence of 0/1 values.

    Returns:
        One-dimensional uint8 array.

    Raises:
        ValueError: If any element is not 0 or 1.
    """
    arr = np.asarray(bits).reshape(-1)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("bit block contains values other than 0 and 1")
    return arr.astype(np.uint8, copy=False)
