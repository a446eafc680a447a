"""Logging configuration for the link simulator.

Unified format with emoji prefixes identifying the emitting module.
Configure logging once at CLI startup.

Example:
    >>> from src.utils.logging_config import setup_logging
    >>> import logging
    >>> setup_logging(level=logging.DEBUG)
    >>> logging.getLogger("src.runner").info("qpsk @ 0 dB: 52/10400 errors")
    2026.03.02 14:32:07 | INFO    | 🎬 runner: qpsk @ 0 dB: 52/10400 errors
"""

import logging
import sys
from datetime import datetime

EMOJI_MAP: dict[str, str] = {
    "config": "⚙️",
    "cli": "⌨️",
    "runner": "🎬",
    "link": "🔗",
    "analysis": "📈",
    "storage": "💾",
    "templates": "📝",
    "reporters": "📢",
    "fec": "🧮",
    "spread": "🎛️",
    "modem": "✴️",
    "ofdm": "〰️",
    "mimo": "📡",
    "channel": "🌫️",
}

DEFAULT_EMOJI = "📋"

# Loggers that emit once per frame inside pool workers.
WORKER_QUIET_LOGGERS: tuple[str, ...] = ("src.link", "src.phy")


class EmojiFormatter(logging.Formatter):
    """Formatter with emoji prefixes and a fixed timestamp layout.

    Format: YYYY.MM.DD HH:MM:SS | LEVEL   | 🏷️ module: message
    """

    def format(self, record: logging.LogRecord) -> str:
        # "src.phy.mimo" -> "mimo"
        module = record.name.rsplit(".", 1)[-1]
        emoji = EMOJI_MAP.get(module, DEFAULT_EMOJI)
        timestamp = datetime.fromtimestamp(record.created).strftime("%Y.%m.%d %H:%M:%S")
        level = record.levelname.ljust(7)
        message = f"{timestamp} | {level} | {emoji} {module}: {record.getMessage()}"
        if record.exc_info:
            message = f"{message}\n{self.formatException(record.exc_info)}"
        return message


def setup_logging(level: int = logging.INFO) -> None:
    """Install one stderr handler with EmojiFormatter on the root logger.

    Existing root handlers are removed to avoid duplicate output.

    Args:
        level: Logging level (default: logging.INFO).
    """
    root_logger = logging.getLogger()

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(EmojiFormatter())

    root_logger.addHandler(handler)
    root_logger.setLevel(level)


def setup_worker_logging(level: int) -> None:
    """Initializer for pool workers.

    Spawned workers start with an unconfigured root logger, so they get the
    same handler as the parent. Per-frame chatter from the link and phy
    modules stays at WARNING unless the parent runs at DEBUG, since every
    worker would otherwise repeat it for each frame.

    Args:
        level: Effective level of the parent process.
    """
    setup_logging(level)
    quiet = logging.NOTSET if level <= logging.DEBUG else logging.WARNING
    for name in WORKER_QUIET_LOGGERS:
        logging.getLogger(name).setLevel(quiet)
