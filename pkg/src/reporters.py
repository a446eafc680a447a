"""Console output of sweep results.

Reporters receive finished records and print them: one table per
modulation, then the gain comparison against the reference modulation.

Example:
    >>> from src.reporters import ConsoleReporter
    >>> reporter = ConsoleReporter()
    >>> reporter.output_records(records, cfg)
    >>> reporter.output_gains(rows, reference="64qam", at_ber=1e-2, ber_snr_db=-1.0)
"""

from __future__ import annotations

import logging
import sys
from collections.abc import Sequence
from typing import TYPE_CHECKING, Protocol

from src.analysis import GainRow, ebn0_offset_db
from src.phy.modem import DISPLAY_NAMES, get_scheme

if TYPE_CHECKING:
    from src.config import SimConfig
    from src.runner import BerRecord

__all__ = ["Reporter", "ConsoleReporter", "format_db"]

logger = logging.getLogger(__name__)

BOX_CHAR = "═"
HEADER_WIDTH = 43


def format_db(value: float | None, digits: int = 2) -> str:
    """dB value, or "not reached" for a missing one.

    Example:
        >>> format_db(17.561)
        '17.56'
        >>> format_db(None)
        'not reached'
    """
    return "not reached" if value is None else f"{value:.{digits}f}"


def _display(name: str) -> str:
    return DISPLAY_NAMES.get(name, name)


class Reporter(Protocol):
    """Interface every reporter implements."""

    def output_records(self, records: Sequence[BerRecord], cfg: SimConfig) -> None:
        """Report per-point results of a sweep."""
        ...

    def output_gains(
        self, rows: Sequence[GainRow], reference: str, at_ber: float, ber_snr_db: float
    ) -> None:
        """Report the comparison against the reference modulation."""
        ...


class ConsoleReporter:
    """Prints sweep tables to stdout.

    Example:
        >>> ConsoleReporter(show_table=False).output_records(records, cfg)  # prints nothing
    """

    def __init__(self, show_table: bool = True) -> None:
        """Initialize console reporter.

        Args:
            show_table: Whether to print the per-point tables. The gain
                table is always printed.
        """
        self._show_table = show_table

    def output_records(self, records: Sequence[BerRecord], cfg: SimConfig) -> None:
        """Print one block per modulation.

        ```
        ═══════════════════════════════════════════
        QPSK (zf, 1 user, coded)
        ═══════════════════════════════════════════
          SNR dB  Eb/N0 dB   errors       bits        BER  frames
           -10.0      -1.0     5012      10400  4.819e-01      10
        ```
        """
        if not self._show_table:
            return
        try:
            self._print_records(records, cfg)
        except Exception as e:
            logger.warning("ConsoleReporter failed: %s", e)

    def _print_records(self, records: Sequence[BerRecord], cfg: SimConfig) -> None:
        header_line = BOX_CHAR * HEADER_WIDTH
        coding = "coded" if cfg.coding == "conv" else "uncoded"
        users = f"{cfg.users} user" + ("s" if cfg.users > 1 else "")
        for name in dict.fromkeys(r.modulation for r in records):
            offset = ebn0_offset_db(
                get_scheme(name).bits_per_symbol,
                cfg.code_rate,
                cfg.spreading_factor,
                cfg.chip_width,
            )
            self._safe_print("")
            self._safe_print(header_line)
            self._safe_print(f"{_display(name)} ({cfg.detector}, {users}, {coding})")
            self._safe_print(header_line)
            self._safe_print(
                f"{'SNR dB':>8}{'Eb/N0 dB':>10}{'errors':>9}{'bits':>11}{'BER':>11}{'frames':>8}"
            )
            for r in sorted((r for r in records if r.modulation == name), key=lambda r: r.snr_db):
                self._safe_print(
                    f"{r.snr_db:>8.1f}{r.snr_db + offset:>10.1f}{r.bit_errors:>9d}"
                    f"{r.bits_sent:>11d}{r.ber:>11.3e}{r.frames:>8d}"
                )
        self._safe_print("")

    def output_gains(
        self, rows: Sequence[GainRow], reference: str, at_ber: float, ber_snr_db: float
    ) -> None:
        """Print measured gains next to the published figures."""
        try:
            self._print_gains(rows, reference, at_ber, ber_snr_db)
        except Exception as e:
            logger.warning("ConsoleReporter failed: %s", e)

    def _print_gains(
        self, rows: Sequence[GainRow], reference: str, at_ber: float, ber_snr_db: float
    ) -> None:
        header_line = BOX_CHAR * HEADER_WIDTH
        self._safe_print(header_line)
        self._safe_print(f"Gain w.r.t. {_display(reference)} at BER {at_ber:.0e}")
        self._safe_print(header_line)
        self._safe_print(
            f"{'modulation':<11}{'gain dB':>12}{f'BER@{ber_snr_db:g}dB':>12}"
            f"{'error-free':>12}{'published':>11}"
        )
        for row in rows:
            ber_cell = "-" if row.ber_at_fixed_snr is None else f"{row.ber_at_fixed_snr:.3e}"
            clean = "-" if row.error_free_snr_db is None else f"{row.error_free_snr_db:g} dB"
            published = "-" if row.published_gain_db is None else f"{row.published_gain_db:.3f}"
            self._safe_print(
                f"{_display(row.modulation):<11}{format_db(row.gain_db):>12}{ber_cell:>12}"
                f"{clean:>12}{published:>11}"
            )
        self._safe_print(header_line)
        self._safe_print("")

    def _safe_print(self, text: str) -> None:
        """Print text with encoding error handling."""
        try:
            print(text)
        except UnicodeEncodeError:
            encoded = text.encode(sys.stdout.encoding or "utf-8", errors="replace")
            print(encoded.decode(sys.stdout.encoding or "utf-8", errors="replace"))
