"""BER curve metrics and the analytic Rayleigh diversity reference.

Curves are read from BerRecord lists. Interpolation is linear in
log10(BER) between adjacent grid points; a point with zero errors enters
as half an error (0.5 / bits_sent) so that log-domain interpolation stays
finite.

Example:
    >>> from src.analysis import mrc_ber_qpsk
    >>> round(mrc_ber_qpsk(0.0, branches=1), 4)
    0.2764
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import comb, erfc

from src.runner import BerRecord

logger = logging.getLogger(__name__)

# Diversity order of 2x4 Alamouti with ZF detection.
DIVERSITY_BRANCHES = 8

# Published gains relative to 64-QAM, kept for side-by-side reporting.
PUBLISHED_GAINS_DB: dict[str, float] = {
    "qpsk": 17.56,
    "8qam": 5.25,
    "8psk": 2.946,
    "16qam": 1.867,
    "32qam": 0.486,
    "64qam": 0.0,
}

# Chunk of channel draws evaluated at once by the numerical oracle.
ORACLE_CHUNK = 1 << 18


def curve(records: Iterable[BerRecord], modulation: str) -> list[tuple[float, float]]:
    """(snr_db, effective BER) pairs of one modulation, ascending in SNR."""
    points = []
    for r in records:
        if r.modulation != modulation or r.bits_sent == 0:
            continue
        ber = r.ber if r.bit_errors else 0.5 / r.bits_sent
        points.append((r.snr_db, ber))
    return sorted(points)


def _lerp(x: float, x0: float, x1: float, y0: float, y1: float) -> float:
    if x1 == x0:
        return y0
    return y0 + (x - x0) * (y1 - y0) / (x1 - x0)


def snr_at_ber(records: Iterable[BerRecord], modulation: str, target: float) -> float | None:
    """SNR at which the curve first falls to target, or None if it never does.

    Example:
        >>> recs = [BerRecord(snr_db=s, modulation="qpsk", detector="zf", users=1,
        ...                   frames=1, bits_sent=1000, bit_errors=e, seed=0)
        ...         for s, e in [(0.0, 100), (2.0, 1)]]
        >>> snr_at_ber(recs, "qpsk", 0.01)
        1.0
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target BER must be in (0, 1), got {target}")
    points = curve(records, modulation)
    if not points:
        return None
    log_t = math.log10(target)
    if points[0][1] == target:
        return points[0][0]
    for (s0, b0), (s1, b1) in zip(points, points[1:]):
        if b0 >= target >= b1:
            return _lerp(log_t, math.log10(b0), math.log10(b1), s0, s1)
    return None


def ber_at_snr(records: Iterable[BerRecord], modulation: str, snr_db: float) -> float | None:
    """Curve value at snr_db (log-linear between grid points), None off the grid."""
    points = curve(records, modulation)
    for (s0, b0), (s1, b1) in zip(points, points[1:]):
        if s0 <= snr_db <= s1:
            return float(10 ** _lerp(snr_db, s0, s1, math.log10(b0), math.log10(b1)))
    if points and math.isclose(points[-1][0], snr_db):
        return points[-1][1]
    return None


def gain_vs_reference(
    records: Sequence[BerRecord], reference: str, at_ber: float
) -> dict[str, float | None]:
    """SNR advantage (dB) of each modulation over the reference at a target BER.

    Returns:
        Modulation -> gain in dB, or None when either curve does not reach
        at_ber inside the simulated grid.
    """
    ref_snr = snr_at_ber(records, reference, at_ber)
    if ref_snr is None:
        logger.warning("Reference %s never reaches BER %.1e", reference, at_ber)
    gains: dict[str, float | None] = {}
    for name in dict.fromkeys(r.modulation for r in records):
        snr = snr_at_ber(records, name, at_ber)
        gains[name] = None if snr is None or ref_snr is None else ref_snr - snr
    return gains


def error_free_snr(records: Iterable[BerRecord], modulation: str) -> float | None:
    """Lowest grid SNR from which every remaining point has zero errors."""
    ordered = sorted((r for r in records if r.modulation == modulation), key=lambda r: r.snr_db)
    found: float | None = None
    for r in reversed(ordered):
        if r.bit_errors:
            break
        found = r.snr_db
    return found


def ebn0_offset_db(
    bits_per_symbol: int, code_rate: float, spreading_factor: int, chip_width: int = 1
) -> float:
    """dB to add to the symbol SNR to obtain Eb/N0 per message bit.

    One message bit costs spreading_factor * chip_width / code_rate label
    bits, i.e. that many over bits_per_symbol symbols.
    """
    if bits_per_symbol < 1 or spreading_factor < 1 or chip_width < 1 or code_rate <= 0:
        raise ValueError("rates and sizes must be positive")
    return 10.0 * math.log10(spreading_factor * chip_width / (bits_per_symbol * code_rate))


def ber_sigma(record: BerRecord) -> float:
    """Binomial standard deviation of the BER estimate."""
    if record.bits_sent == 0:
        return 0.0
    p = record.ber
    return math.sqrt(p * (1.0 - p) / record.bits_sent)


def mrc_ber_qpsk(snr_db: float, branches: int = DIVERSITY_BRANCHES) -> float:
    """Closed-form Gray-QPSK bit error rate over i.i.d. Rayleigh branches.

    Each branch carries average SNR gamma/2, so with gbar = gamma/2 and
    mu = sqrt(gbar / (2 + gbar)):
    P = ((1 - mu)/2)^L * sum_{k<L} C(L-1+k, k) ((1 + mu)/2)^k.
    """
    if branches < 1:
        raise ValueError(f"branches must be >= 1, got {branches}")
    gamma_bar = 10.0 ** (snr_db / 10.0) / 2.0
    mu = math.sqrt(gamma_bar / (2.0 + gamma_bar))
    k = np.arange(branches)
    terms = comb(branches - 1 + k, k) * ((1.0 + mu) / 2.0) ** k
    return float(((1.0 - mu) / 2.0) ** branches * np.sum(terms))


def mrc_ber_qpsk_monte_carlo(
    snr_db: float,
    draws: int,
    rng: np.random.Generator,
    branches: int = DIVERSITY_BRANCHES,
) -> float:
    """Average of Q(sqrt(||h||^2 gamma / 2)) over Rayleigh channel draws."""
    if draws < 1:
        raise ValueError(f"draws must be >= 1, got {draws}")
    gamma = 10.0 ** (snr_db / 10.0)
    total = 0.0
    remaining = draws
    while remaining:
        n = min(remaining, ORACLE_CHUNK)
        # |h|^2 summed over branches: half a chi-square with 2L degrees of freedom
        energy = np.sum(rng.standard_normal((n, 2 * branches)) ** 2, axis=1) / 2.0
        total += float(np.sum(0.5 * erfc(np.sqrt(energy * gamma / 2.0) / math.sqrt(2))))
        remaining -= n
    return total / draws


@dataclass(frozen=True)
class GainRow:
    """One line of the comparison table against the reference modulation."""

    modulation: str
    gain_db: float | None
    ber_at_fixed_snr: float | None
    error_free_snr_db: float | None
    published_gain_db: float | None


def gain_table(
    records: Sequence[BerRecord], reference: str, at_ber: float, ber_snr_db: float
) -> list[GainRow]:
    """Measured gains, BER at the fixed SNR and error-free SNR per modulation."""
    gains = gain_vs_reference(records, reference, at_ber)
    return [
        GainRow(
            modulation=name,
            gain_db=gain,
            ber_at_fixed_snr=ber_at_snr(records, name, ber_snr_db),
            error_free_snr_db=error_free_snr(records, name),
            published_gain_db=PUBLISHED_GAINS_DB.get(name) if reference == "64qam" else None,
        )
        for name, gain in gains.items()
    ]
