"""Rate-1/2 convolutional code with hard-decision Viterbi decoding.

The encoder is a non-systematic feed-forward shift register. Generator
masks use bit i for the input delayed by i steps, so the default (7, 5)
octal pair taps (d_i, d_i-1, d_i-2) and (d_i, d_i-2).

Example:
    >>> from src.phy.fec import ConvCode, conv_encode, viterbi_decode
    >>> code = ConvCode()
    >>> coded = conv_encode([1, 0, 1, 1], code)
    >>> coded.tolist()
    [1, 1, 1, 0, 0, 0, 0, 1, 0, 1, 1, 1]
    >>> viterbi_decode(coded, code).tolist()
    [1, 0, 1, 1]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt

from src.phy.common import (
    BitBlock,
    EmptyInputError,
    OracleTooLargeError,
    UnpairedBitsError,
    as_bits,
)

logger = logging.getLogger(__name__)

ORACLE_MAX_BITS = 16


@dataclass(frozen=True)
class ConvCode:
    """Feed-forward rate-1/2 convolutional code.

    Attributes:
        constraint_length: Register span K (inputs influencing one output pair).
        generators: Two tap masks, one per output stream.
        terminated: Whether K-1 zero flush bits close the trellis.

    Example:
        >>> ConvCode(constraint_length=3, generators=(0o7, 0o5)).n_states
        4
    """

    constraint_length: int = 3
    generators: tuple[int, int] = (0o7, 0o5)
    terminated: bool = True

    def __post_init__(self) -> None:
        k = self.constraint_length
        if k < 2:
            raise ValueError(f"constraint_length must be >= 2, got {k}")
        if len(self.generators) != 2:
            raise ValueError("rate-1/2 code needs exactly two generators")
        for g in self.generators:
            if g <= 0 or g >= (1 << k):
                raise ValueError(f"generator {g:o} (octal) does not fit constraint length {k}")
        if not any(g >> (k - 1) & 1 for g in self.generators):
            raise ValueError("no generator taps the oldest register stage")

    @property
    def memory(self) -> int:
        """Number of register stages (K - 1)."""
        return self.constraint_length - 1

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @cached_property
    def taps(self) -> npt.NDArray[np.uint8]:
        """Tap matrix of shape (2, K); row j, column i is bit i of generator j."""
        k = self.constraint_length
        return np.array(
            [[(g >> i) & 1 for i in range(k)] for g in self.generators], dtype=np.uint8
        )

    @cached_property
    def trellis(self) -> tuple[npt.NDArray[np.intp], npt.NDArray[np.uint8]]:
        """Predecessor table and branch outputs.

        Returns:
            prev: (n_states, 2) predecessor state for departing bit d.
            outputs: (n_states, 2, 2) output pair on the branch prev[s, d] -> s.
        """
        states = np.arange(self.n_states)
        prev = np.empty((self.n_states, 2), dtype=np.intp)
        outputs = np.empty((self.n_states, 2, 2), dtype=np.uint8)
        for d in (0, 1):
            prev[:, d] = (states >> 1) | (d << (self.memory - 1))
            # full register: newest input in bit 0, departing bit in bit K-1
            register = (states | (d << self.memory)).astype(np.int64)
            for j, g in enumerate(self.generators):
                outputs[:, d, j] = np.array(
                    [bin(int(r) & g).count("1") & 1 for r in register], dtype=np.uint8
                )
        return prev, outputs


DEFAULT_CODE = ConvCode()


def conv_encode(msg: npt.ArrayLike, code: ConvCode = DEFAULT_CODE) -> BitBlock:
    """Encode a message into interleaved (out1, out2) pairs.

    Args:
        msg: Message bits.
        code: Convolutional code; starts in the all-zero state.

    Returns:
        2*len(msg) coded bits, plus 2*(K-1) flush outputs when terminated.

    Raises:
        EmptyInputError: Message is empty.
    """
    bits = as_bits(msg)
    if bits.size == 0:
        raise EmptyInputError()
    if code.terminated:
        bits = np.concatenate([bits, np.zeros(code.memory, dtype=np.uint8)])

    n = bits.size
    coded = np.empty(2 * n, dtype=np.uint8)
    for j in range(2):
        stream = np.convolve(bits.astype(np.int64), code.taps[j].astype(np.int64))[:n]
        coded[j::2] = stream & 1
    return coded


def viterbi_decode(coded: npt.ArrayLike, code: ConvCode = DEFAULT_CODE) -> BitBlock:
    """Hard-decision Viterbi decoding (minimum Hamming distance path).

    Merge ties keep the predecessor whose departing bit is 0. Without
    termination the traceback starts from the best final state, lowest
    state index on ties.

    Args:
        coded: Received bit pairs, possibly corrupted.
        code: Code used by the encoder.

    Returns:
        Decoded message, flush bits removed when terminated.

    Raises:
        UnpairedBitsError: Odd number of received bits.
    """
    rx = as_bits(coded)
    if rx.size % 2:
        raise UnpairedBitsError(rx.size)
    n_steps = rx.size // 2
    if n_steps == 0:
        return np.zeros(0, dtype=np.uint8)

    prev, outputs = code.trellis
    pairs = rx.reshape(n_steps, 1, 1, 2)
    # (steps, states, departing bit)
    branch = (outputs[np.newaxis] != pairs).sum(axis=-1, dtype=np.int64)

    metrics = np.full(code.n_states, np.iinfo(np.int64).max // 4, dtype=np.int64)
    metrics[0] = 0
    decisions = np.empty((n_steps, code.n_states), dtype=np.uint8)
    rows = np.arange(code.n_states)
    for t in range(n_steps):
        candidates = metrics[prev] + branch[t]
        choice = np.argmin(candidates, axis=1)
        decisions[t] = choice
        metrics = candidates[rows, choice]

    state = 0 if code.terminated else int(np.argmin(metrics))
    decoded = np.empty(n_steps, dtype=np.uint8)
    for t in range(n_steps - 1, -1, -1):
        decoded[t] = state & 1
        state = int(prev[state, decisions[t, state]])

    if code.terminated:
        decoded = decoded[: max(n_steps - code.memory, 0)]
    return decoded


def ml_decode_oracle(
    coded: npt.ArrayLike, code: ConvCode = DEFAULT_CODE, msg_len: int | None = None
) -> BitBlock:
    """Exhaustive maximum-likelihood decoding for short messages.

    Encodes all 2**msg_len messages and returns the Hamming-nearest one.
    Messages are enumerated MSB-first, so ties resolve to the numerically
    smallest message.

    Args:
        coded: Received bits.
        code: Code used by the encoder.
        msg_len: Message length; derived from len(coded) when omitted.

    Returns:
        Nearest message.

    Raises:
        OracleTooLargeError: msg_len exceeds 16.
        UnpairedBitsError: Odd number of received bits.
    """
    rx = as_bits(coded)
    if rx.size % 2:
        raise UnpairedBitsError(rx.size)
    if msg_len is None:
        msg_len = rx.size // 2 - (code.memory if code.terminated else 0)
    if msg_len > ORACLE_MAX_BITS:
        raise OracleTooLargeError(msg_len, ORACLE_MAX_BITS)
    if msg_len <= 0:
        raise EmptyInputError()

    # the code is linear: codeword = msg @ G (mod 2) with G built from unit messages
    generator = np.stack([conv_encode(row, code) for row in np.eye(msg_len, dtype=np.uint8)])
    if generator.shape[1] != rx.size:
        raise ValueError(
            f"coded length {rx.size} does not match msg_len={msg_len} for this code"
        )
    shifts = np.arange(msg_len - 1, -1, -1)
    messages = ((np.arange(1 << msg_len)[:, np.newaxis] >> shifts) & 1).astype(np.uint8)
    codewords = (messages.astype(np.int64) @ generator.astype(np.int64)) & 1
    distances = (codewords != rx).sum(axis=1)
    best = int(np.argmin(distances))
    logger.debug("ML oracle: %d candidates, best distance %d", messages.shape[0], distances[best])
    return messages[best]


def hamming_distance(a: npt.ArrayLike, b: npt.ArrayLike) -> int:
    """Number of differing positions between two equal-length bit blocks."""
    return int(np.count_nonzero(as_bits(a) != as_bits(b)))
