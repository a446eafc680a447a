"""Spreading codes, chip-level spreading and correlation despreading.

PN codes are slices of a Fibonacci LFSR m-sequence; Walsh codes are rows
of a Sylvester-Hadamard matrix. A bit b spreads to (1 - 2b) * chips.

Example:
    >>> from src.phy.spread import despread, spread, walsh_code
    >>> code = walsh_code(8, user_id=3)
    >>> chips = spread([0, 1], code)
    >>> despread(chips, code).tolist()
    [0, 1]
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.linalg import hadamard

from src.phy.common import (
    BitBlock,
    DegenerateStateError,
    RaggedBlockError,
    RealArray,
    as_bits,
)

logger = logging.getLogger(__name__)

# x^7 + x^6 + 1, period 127
DEFAULT_PN_POLY = (1 << 7) | (1 << 6) | 1

CodeKind = Literal["pn_lfsr", "walsh"]


@dataclass(frozen=True)
class SpreadingCode:
    """A +/-1 signature of length equal to the spreading factor.

    Attributes:
        kind: "pn_lfsr" or "walsh".
        chips: Signature chips, each -1.0 or +1.0.
        user_id: User index the code belongs to.
    """

    kind: CodeKind
    chips: tuple[float, ...]
    user_id: int = 0

    def __post_init__(self) -> None:
        if not self.chips:
            raise ValueError("spreading code needs at least one chip")
        if any(c not in (-1.0, 1.0) for c in self.chips):
            raise ValueError("spreading chips must be -1 or +1")
        if self.user_id < 0:
            raise ValueError(f"user_id must be >= 0, got {self.user_id}")

    @property
    def spreading_factor(self) -> int:
        return len(self.chips)

    @property
    def array(self) -> RealArray:
        return np.asarray(self.chips, dtype=np.float64)


def pn_generate(poly: int, seed: int, count: int) -> RealArray:
    """Generate +/-1 chips from a Fibonacci LFSR.

    The register has deg(poly) stages; bit i of seed initialises stage i+1.
    Each step outputs the last stage, then shifts in the XOR of the stages
    whose exponents appear in poly (the constant term excluded). Output bit
    b becomes chip 1 - 2b.

    Args:
        poly: Feedback polynomial as a bit mask (bit i = coefficient of x^i).
        seed: Initial register contents, non-zero.
        count: Number of chips to produce.

    Returns:
        Array of count chips.

    Raises:
        DegenerateStateError: seed is zero within the register width.
        ValueError: poly has degree < 1 or count is negative.
    """
    degree = poly.bit_length() - 1
    if degree < 1:
        raise ValueError(f"LFSR polynomial needs degree >= 1, got {poly:#b}")
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    state = [(seed >> i) & 1 for i in range(degree)]
    if not any(state):
        raise DegenerateStateError()

    taps = [i - 1 for i in range(1, degree + 1) if (poly >> i) & 1]
    out = np.empty(count, dtype=np.float64)
    for n in range(count):
        out[n] = 1 - 2 * state[-1]
        feedback = 0
        for t in taps:
            feedback ^= state[t]
        state = [feedback] + state[:-1]
    return out


def walsh_generate(order: int, user_id: int) -> RealArray:
    """Row user_id of the Sylvester-Hadamard matrix of size order.

    Raises:
        ValueError: order is not a power of two, or user_id out of range.
    """
    if order < 1 or order & (order - 1):
        raise ValueError(f"Walsh order must be a power of two, got {order}")
    if not 0 <= user_id < order:
        raise ValueError(f"Walsh id must be in [0, {order}), got {user_id}")
    return hadamard(order, dtype=np.float64)[user_id]


def pn_code(spreading_factor: int, user_id: int = 0, poly: int = DEFAULT_PN_POLY) -> SpreadingCode:
    """PN signature for a user: LFSR seeded with user_id + 1."""
    chips = pn_generate(poly, seed=user_id + 1, count=spreading_factor)
    return SpreadingCode(kind="pn_lfsr", chips=tuple(float(c) for c in chips), user_id=user_id)


def walsh_code(spreading_factor: int, user_id: int = 0) -> SpreadingCode:
    chips = walsh_generate(spreading_factor, user_id)
    return SpreadingCode(kind="walsh", chips=tuple(float(c) for c in chips), user_id=user_id)


def make_codes(kind: CodeKind, spreading_factor: int, users: int) -> list[SpreadingCode]:
    """Signatures for users 0..users-1."""
    factory = walsh_code if kind == "walsh" else pn_code
    return [factory(spreading_factor, user_id=u) for u in range(users)]


def spread(bits: npt.ArrayLike, code: SpreadingCode) -> RealArray:
    """Replace each bit b by (1 - 2b) * code chips.

    Returns:
        Chip block of length spreading_factor * len(bits).
    """
    antipodal = 1.0 - 2.0 * as_bits(bits).astype(np.float64)
    return np.outer(antipodal, code.array).reshape(-1)


def despread(chips: npt.ArrayLike, code: SpreadingCode) -> BitBlock:
    """Correlate each chip group with the code and slice.

    A group decodes to 1 only when its correlation is strictly negative.

    Raises:
        RaggedBlockError: Length is not a multiple of the spreading factor.
    """
    values = np.asarray(chips, dtype=np.float64).reshape(-1)
    sf = code.spreading_factor
    if values.size % sf:
        raise RaggedBlockError("ragged chip block", values.size, sf)
    correlation = values.reshape(-1, sf) @ code.array
    return (correlation < 0).astype(np.uint8)


def superpose(chip_blocks: Sequence[RealArray]) -> RealArray:
    """Sum equal-length chip streams of several users."""
    return np.sum(np.stack([np.asarray(c, dtype=np.float64) for c in chip_blocks]), axis=0)


def level_width(users: int) -> int:
    """Bits needed to carry the users + 1 levels of a superposed chip."""
    if users < 1:
        raise ValueError(f"users must be >= 1, got {users}")
    return max(1, users.bit_length())


def quantize_chips(chips: npt.ArrayLike, users: int) -> BitBlock:
    """Map superposed chips to Gray-coded level bits, MSB first.

    A sum of `users` antipodal chips v takes levels m = (users - v) / 2 in
    [0, users]. For a single user this is the plain chip map +1 -> 0,
    -1 -> 1.

    Raises:
        ValueError: A chip value is not a reachable superposition level.
    """
    values = np.asarray(chips, dtype=np.float64).reshape(-1)
    levels = (users - values) / 2.0
    index = np.rint(levels).astype(np.int64)
    if not np.allclose(levels, index) or index.min(initial=0) < 0 or index.max(initial=0) > users:
        raise ValueError(f"chip values are not superposition levels of {users} user(s)")
    gray = index ^ (index >> 1)
    width = level_width(users)
    shifts = np.arange(width - 1, -1, -1)
    return ((gray[:, np.newaxis] >> shifts) & 1).astype(np.uint8).reshape(-1)


def dequantize_chips(bits: npt.ArrayLike, users: int) -> RealArray:
    """Inverse of quantize_chips; out-of-range levels are clipped to [0, users].

    Raises:
        RaggedBlockError: Bit count is not a multiple of the level width.
    """
    width = level_width(users)
    arr = as_bits(bits)
    if arr.size % width:
        raise RaggedBlockError("ragged level block", arr.size, width)
    gray = arr.reshape(-1, width).astype(np.int64) @ (1 << np.arange(width - 1, -1, -1))
    index = gray.copy()
    shift = gray >> 1
    while shift.any():
        index ^= shift
        shift >>= 1
    index = np.clip(index, 0, users)
    return (users - 2 * index).astype(np.float64)
