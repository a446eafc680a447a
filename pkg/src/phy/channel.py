"""Rayleigh flat fading, AWGN and SNR calibration.

SNR is the per-receive-antenna symbol SNR Es/sigma^2 with Es = 1, so
sigma^2 = 10^(-snr_db/10). Fading gains are CN(0, 1).

Example:
    >>> import numpy as np
    >>> from src.phy.channel import NoiseSpec, draw_channel
    >>> NoiseSpec.from_snr_db(0.0).sigma2
    1.0
    >>> draw_channel(4, 2, np.random.default_rng(7)).shape
    (4, 2)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from src.phy.common import ComplexArray
from src.phy.mimo import AlamoutiBlock

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level of one SNR point.

    Attributes:
        snr_db: Symbol SNR in dB; +inf means noiseless.
        sigma2: Complex noise variance per sample per receive antenna.
    """

    snr_db: float
    sigma2: float

    def __post_init__(self) -> None:
        if self.sigma2 < 0 or math.isnan(self.sigma2):
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> NoiseSpec:
        if math.isnan(snr_db):
            raise ValueError("snr_db must not be NaN")
        sigma2 = 0.0 if math.isinf(snr_db) and snr_db > 0 else 10.0 ** (-snr_db / 10.0)
        return cls(snr_db=snr_db, sigma2=sigma2)

    @classmethod
    def noiseless(cls) -> NoiseSpec:
        return cls(snr_db=math.inf, sigma2=0.0)


def complex_gaussian(
    shape: tuple[int, ...], rng: np.random.Generator, variance: float = 1.0
) -> ComplexArray:
    """Circularly-symmetric Gaussian samples, variance/2 per real dimension."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(
    nr: int, nt: int, rng: np.random.Generator, blocks: int | None = None
) -> ComplexArray:
    """I.i.d. Rayleigh gains h[j, i] from transmit antenna i to receive antenna j.

    Args:
        nr: Receive antennas.
        nt: Transmit antennas.
        rng: Random generator owned by the caller.
        blocks: When given, draw an independent (nr, nt) matrix per block.

    Returns:
        (nr, nt) or (blocks, nr, nt) complex array with E|h|^2 = 1.
    """
    if nr < 1 or nt < 1:
        raise ValueError(f"antenna counts must be >= 1, got nr={nr}, nt={nt}")
    shape = (nr, nt) if blocks is None else (blocks, nr, nt)
    return complex_gaussian(shape, rng)


def apply_awgn(
    signal: npt.ArrayLike, spec: NoiseSpec, rng: np.random.Generator
) -> ComplexArray:
    """Add CN(0, sigma2) noise to every sample.

    The generator is not advanced when sigma2 is zero.
    """
    x = np.asarray(signal, dtype=np.complex128)
    if spec.sigma2 == 0.0:
        return x.copy()
    return x + complex_gaussian(x.shape, rng, spec.sigma2)


def transmit(
    block: AlamoutiBlock, h: npt.ArrayLike, spec: NoiseSpec, rng: np.random.Generator
) -> ComplexArray:
    """Pass Alamouti blocks through quasi-static channels: y[:, t] = h tx[t]^T + n_t.

    Args:
        block: Transmit matrices (..., 2, 2).
        h: Channels (..., Nr, 2), constant over both slots of a block.
        spec: Noise level.
        rng: Random generator owned by the caller.

    Returns:
        (..., Nr, 2) received samples, columns = time slots.
    """
    gains = np.asarray(h, dtype=np.complex128)
    clean = gains @ np.swapaxes(block.tx, -1, -2)
    return apply_awgn(clean, spec, rng)
