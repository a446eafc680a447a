"""Result persistence: BER record CSV files and generated text artifacts.

CSV layout is one header line and one row per record, LF line endings:

    snr_db,modulation,detector,users,frames,bits_sent,bit_errors,ber,seed

BER is written in scientific notation with 6 significant digits, so the
same records always produce the same bytes.

Example:
    >>> from pathlib import Path
    >>> from src.utils.storage import read_csv, write_csv
    >>> write_csv(records, Path("results/ber.csv"))
    >>> read_csv(Path("results/ber.csv")) == records
    True
"""

from __future__ import annotations

import csv
import io
import logging
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from src.runner import BerRecord

logger = logging.getLogger(__name__)

CSV_HEADER: tuple[str, ...] = (
    "snr_db",
    "modulation",
    "detector",
    "users",
    "frames",
    "bits_sent",
    "bit_errors",
    "ber",
    "seed",
)


# =============================================================================
# Exceptions
# =============================================================================


class InvalidDataError(Exception):
    """CSV parsing or validation failed.

    Example:
        >>> raise InvalidDataError("Bad header", Path("ber.csv"))
    """

    def __init__(self, message: str, path: Path | None = None) -> None:
        self.path = path
        super().__init__(message)


class StorageIOError(Exception):
    """File read/write failed.

    Example:
        >>> raise StorageIOError("Cannot write file", Path("ber.csv"), cause=err)
    """

    def __init__(self, message: str, path: Path, cause: Exception | None = None) -> None:
        self.path = path
        self.cause = cause
        super().__init__(message)


# =============================================================================
# Writers
# =============================================================================


def format_row(record: BerRecord) -> list[str]:
    """CSV cells of one record in header order."""
    return [
        f"{record.snr_db:g}",
        record.modulation,
        record.detector,
        str(record.users),
        str(record.frames),
        str(record.bits_sent),
        str(record.bit_errors),
        f"{record.ber:.5e}",
        str(record.seed),
    ]


def write_text(path: Path, text: str) -> None:
    """Write text with LF line endings, creating parent folders.

    Raises:
        StorageIOError: File write failed.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        logger.error("Cannot write %s: %s", path, e)
        raise StorageIOError(f"Cannot write {path}: {e}", path, e) from e
    logger.debug("Wrote %s (%d bytes)", path, len(text.encode("utf-8")))


def write_csv(records: Sequence[BerRecord], path: Path) -> None:
    """Write records below a fixed header.

    Rows are grouped by modulation in order of first appearance, then
    sorted by ascending SNR.

    Raises:
        StorageIOError: File write failed.
    """
    groups = {name: i for i, name in enumerate(dict.fromkeys(r.modulation for r in records))}
    ordered = sorted(records, key=lambda r: (groups[r.modulation], r.snr_db))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in ordered:
        writer.writerow(format_row(record))
    write_text(path, buffer.getvalue())
    logger.info("Saved %d record(s) to %s", len(records), path)


# =============================================================================
# Readers
# =============================================================================


def read_csv(path: Path) -> list[BerRecord]:
    """Load records written by write_csv.

    The ber column is recomputed from the counters and not trusted.

    Raises:
        StorageIOError: File read failed.
        InvalidDataError: Header mismatch or malformed row.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error("Cannot read %s: %s", path, e)
        raise StorageIOError(f"Cannot read {path}: {e}", path, e) from e

    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise InvalidDataError(f"Unexpected CSV header in {path}", path)

    records: list[BerRecord] = []
    for number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise InvalidDataError(
                f"{path.name} line {number}: expected {len(CSV_HEADER)} fields, got {len(row)}",
                path,
            )
        data = dict(zip(CSV_HEADER, row, strict=True))
        data.pop("ber")
        try:
            records.append(BerRecord.model_validate(data))
        except ValidationError as e:
            err = e.errors()[0]
            field = ".".join(str(loc) for loc in err["loc"])
            raise InvalidDataError(
                f"{path.name} line {number}: {field} {err['msg']}", path
            ) from e

    logger.debug("Loaded %d record(s) from %s", len(records), path)
    return records
