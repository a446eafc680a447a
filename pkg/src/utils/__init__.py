"""Shared utilities for the link simulator.

- exit_codes: CLI exit codes and log_exit
- logging_config: EmojiFormatter, setup_logging, pool worker initializer
- storage: CSV result files (imported directly, it depends on src.runner)
- templates: plot script rendering (imported directly, same reason)
"""

from src.utils.exit_codes import exit_code_for, log_exit
from src.utils.logging_config import setup_logging, setup_worker_logging

__all__ = [
    "exit_code_for",
    "log_exit",
    "setup_logging",
    "setup_worker_logging",
]
