"""Unit tests for logging_config module."""

import logging
import sys

import pytest

from src.utils.logging_config import (
    DEFAULT_EMOJI,
    EMOJI_MAP,
    WORKER_QUIET_LOGGERS,
    EmojiFormatter,
    setup_logging,
    setup_worker_logging,
)


def make_record(name: str = "src.config", level: int = logging.INFO, msg: str = "Test",
                args: tuple[object, ...] = ()) -> logging.LogRecord:
    return logging.LogRecord(
        name=name, level=level, pathname="", lineno=0, msg=msg, args=args, exc_info=None
    )


class TestEmojiMap:
    """Tests for emoji mapping constants."""

    def test_emoji_map_has_all_modules(self) -> None:
        """EMOJI_MAP contains entries for every module that logs."""
        expected_modules = [
            "config", "cli", "runner", "link", "analysis", "storage", "templates",
            "reporters", "fec", "spread", "modem", "ofdm", "mimo", "channel",
        ]
        for module in expected_modules:
            assert module in EMOJI_MAP, f"Missing emoji for module: {module}"

    def test_default_emoji_is_defined(self) -> None:
        assert DEFAULT_EMOJI
        assert DEFAULT_EMOJI not in EMOJI_MAP.values()


class TestEmojiFormatter:
    """Tests for EmojiFormatter class."""

    def test_format_includes_timestamp(self) -> None:
        """Timestamp layout is YYYY.MM.DD HH:MM:SS."""
        result = EmojiFormatter().format(make_record())
        assert result[4] == "."
        assert result[7] == "."
        assert result[10] == " "
        assert result[13] == ":"
        assert result[16] == ":"

    def test_format_includes_level_padded(self) -> None:
        assert "| INFO    |" in EmojiFormatter().format(make_record())

    def test_nested_module_uses_last_part(self) -> None:
        """src.phy.mimo is shown as mimo with its emoji."""
        result = EmojiFormatter().format(make_record(name="src.phy.mimo"))
        assert f"{EMOJI_MAP['mimo']} mimo:" in result
        assert "src.phy.mimo" not in result

    def test_format_uses_default_emoji_for_unknown_module(self) -> None:
        result = EmojiFormatter().format(make_record(name="src.unknown.module"))
        assert f"{DEFAULT_EMOJI} module:" in result

    def test_format_handles_message_with_args(self) -> None:
        record = make_record(msg="%s @ %g dB: %d errors", args=("qpsk", 3.0, 52))
        assert "qpsk @ 3 dB: 52 errors" in EmojiFormatter().format(record)

    def test_format_non_ascii_message(self) -> None:
        record = make_record(msg="SNR ≥ 10 dB, σ² = 0.1")
        assert "SNR ≥ 10 dB, σ² = 0.1" in EmojiFormatter().format(record)

    def test_format_appends_traceback(self) -> None:
        """exc_info is rendered after the message."""
        try:
            raise RuntimeError("singular")
        except RuntimeError:
            record = make_record(level=logging.ERROR)
            record.exc_info = sys.exc_info()
        result = EmojiFormatter().format(record)
        assert "Traceback" in result
        assert "RuntimeError: singular" in result


class TestSetupLogging:
    """Tests for setup_logging function."""

    def test_setup_logging_configures_root_logger(self) -> None:
        root = logging.getLogger()
        original_handlers = root.handlers[:]
        original_level = root.level
        root.handlers.clear()
        root.addHandler(logging.StreamHandler())

        try:
            setup_logging(level=logging.DEBUG)

            assert len(root.handlers) == 1
            handler = root.handlers[0]
            assert isinstance(handler, logging.StreamHandler)
            assert isinstance(handler.formatter, EmojiFormatter)
            assert handler.stream is sys.stderr
            assert root.level == logging.DEBUG
        finally:
            root.handlers = original_handlers
            root.level = original_level

    def test_setup_logging_default_level_is_info(self) -> None:
        root = logging.getLogger()
        original_handlers = root.handlers[:]
        original_level = root.level

        try:
            setup_logging()
            assert root.level == logging.INFO
        finally:
            root.handlers = original_handlers
            root.level = original_level


class TestSetupWorkerLogging:
    """Tests for the pool worker initializer."""

    @pytest.mark.parametrize(
        ("level", "quiet"),
        [(logging.INFO, logging.WARNING), (logging.DEBUG, logging.NOTSET)],
    )
    def test_frame_loggers_quieted_unless_debug(self, level: int, quiet: int) -> None:
        root = logging.getLogger()
        original_handlers = root.handlers[:]
        original_level = root.level
        originals = {name: logging.getLogger(name).level for name in WORKER_QUIET_LOGGERS}

        try:
            setup_worker_logging(level)
            assert root.level == level
            assert isinstance(root.handlers[0].formatter, EmojiFormatter)
            for name in WORKER_QUIET_LOGGERS:
                assert logging.getLogger(name).level == quiet
        finally:
            root.handlers = original_handlers
            root.level = original_level
            for name, value in originals.items():
                logging.getLogger(name).setLevel(value)

    def test_quiet_loggers_cover_frame_modules(self) -> None:
        assert "src.link" in WORKER_QUIET_LOGGERS
        assert "src.phy" in WORKER_QUIET_LOGGERS


class TestIntegration:
    """Integration tests for logging config."""

    def test_logged_message_has_correct_format(self, capfd: pytest.CaptureFixture[str]) -> None:
        root = logging.getLogger()
        original_handlers = root.handlers[:]
        original_level = root.level
        root.handlers.clear()

        try:
            setup_logging(level=logging.INFO)
            logging.getLogger("src.runner").info("qpsk @ 0 dB: 52/10400 errors")

            output = capfd.readouterr().err
            assert "| INFO    |" in output
            assert f"{EMOJI_MAP['runner']} runner: qpsk @ 0 dB: 52/10400 errors" in output
        finally:
            root.handlers = original_handlers
            root.level = original_level
