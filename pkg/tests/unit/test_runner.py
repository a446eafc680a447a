"""Unit tests for runner module."""

import logging
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from src.config import SimConfig
from src.runner import (
    FRAME_CAP_FACTOR,
    OFF_GRID_KEY_BASE,
    BerRecord,
    SimulationError,
    _PointState,
    _stream_key,
    frame_rng,
    make_executor,
    run_point,
    run_sweep,
)
from src.utils.logging_config import setup_worker_logging


def _state(cfg: SimConfig, batch: int = 3) -> _PointState:
    return _PointState(cfg=cfg, modulation="qpsk", snr_db=0.0, key=0, batch=batch)


class TestBerRecord:
    """Tests for BerRecord model."""

    def test_ber_is_computed(self) -> None:
        """ber = bit_errors / bits_sent."""
        record = BerRecord(
            snr_db=0.0, modulation="qpsk", detector="zf", users=1,
            frames=10, bits_sent=10400, bit_errors=52, seed=2014,
        )
        assert record.ber == pytest.approx(0.005)
        assert record.model_dump()["ber"] == pytest.approx(0.005)

    def test_zero_bits_gives_zero_ber(self) -> None:
        """No bits, no rate."""
        record = BerRecord(
            snr_db=0.0, modulation="qpsk", detector="zf", users=1,
            frames=0, bits_sent=0, bit_errors=0, seed=1,
        )
        assert record.ber == 0.0

    def test_negative_counts_rejected(self) -> None:
        """Counters are non-negative."""
        with pytest.raises(ValidationError):
            BerRecord(
                snr_db=0.0, modulation="qpsk", detector="zf", users=1,
                frames=1, bits_sent=10, bit_errors=-1, seed=1,
            )

    def test_frozen(self) -> None:
        """Records are immutable."""
        record = BerRecord(
            snr_db=0.0, modulation="qpsk", detector="zf", users=1,
            frames=1, bits_sent=10, bit_errors=1, seed=1,
        )
        with pytest.raises(ValidationError):
            record.bit_errors = 2  # type: ignore[misc]


class TestFrameRng:
    """Tests for per-frame random streams."""

    def test_same_key_same_stream(self) -> None:
        """Identical keys reproduce the draws."""
        a = frame_rng(2014, 3, 7).integers(0, 1 << 30, 5)
        b = frame_rng(2014, 3, 7).integers(0, 1 << 30, 5)
        assert np.array_equal(a, b)

    def test_keys_give_distinct_streams(self) -> None:
        """Neighbouring frames, points and seeds differ."""
        base = frame_rng(2014, 3, 7).random(4)
        for other in (frame_rng(2014, 3, 8), frame_rng(2014, 4, 7), frame_rng(2015, 3, 7)):
            assert not np.array_equal(base, other.random(4))


class TestStreamKey:
    """Tests for point stream keys."""

    def test_grid_point_uses_index(self, small_cfg: SimConfig) -> None:
        """5 dB is point 1 of 0:5:10."""
        assert _stream_key(small_cfg, 5.0, None) == 1

    def test_explicit_index_wins(self, small_cfg: SimConfig) -> None:
        """Caller-supplied index is used as is."""
        assert _stream_key(small_cfg, 5.0, 9) == 9

    def test_off_grid_point(self, small_cfg: SimConfig) -> None:
        """Off-grid SNRs map above the grid key range by millidecibel."""
        assert _stream_key(small_cfg, 2.5, None) == OFF_GRID_KEY_BASE + 2500

    def test_negative_index_rejected(self, small_cfg: SimConfig) -> None:
        """Stream keys are non-negative."""
        with pytest.raises(ValueError):
            _stream_key(small_cfg, 0.0, -1)


class TestStoppingRule:
    """Tests for _PointState bookkeeping with synthetic frame outcomes."""

    def test_first_round_requests_minimum_frames(self, small_cfg: SimConfig) -> None:
        """Round one asks for cfg.frames frames."""
        assert _state(small_cfg).next_frames() == range(0, 2)

    def test_stops_at_frames_when_no_error_target(self, small_cfg: SimConfig) -> None:
        """min_bit_errors = 0 stops after cfg.frames."""
        state = _state(small_cfg)
        state.absorb([(0, 48, 0), (0, 48, 0)])
        assert state.done
        assert state.record().frames == 2

    def test_stops_at_first_frame_reaching_target(self, small_cfg: SimConfig) -> None:
        """Frames beyond the stopping index are discarded."""
        cfg = small_cfg.model_copy(update={"min_bit_errors": 10})
        state = _state(cfg)
        state.absorb([(2, 48, 0), (3, 48, 0)])
        assert not state.done
        assert state.next_frames() == range(2, 5)
        state.absorb([(4, 48, 0), (1, 48, 0), (9, 48, 0)])
        record = state.record()
        assert record.frames == 4
        assert record.bit_errors == 10
        assert record.bits_sent == 4 * 48

    def test_cap_stops_and_warns(
        self, small_cfg: SimConfig, caplog: pytest.LogCaptureFixture
    ) -> None:
        """Error-free points stop at the frame cap with a warning."""
        cfg = small_cfg.model_copy(update={"min_bit_errors": 5})
        state = _state(cfg, batch=100)
        state.absorb([(0, 48, 0)] * 2)
        assert state.next_frames() == range(2, FRAME_CAP_FACTOR * 2)
        state.absorb([(0, 48, 0)] * (FRAME_CAP_FACTOR * 2 - 2))
        with caplog.at_level(logging.WARNING, logger="src.runner"):
            record = state.record()
        assert record.frames == FRAME_CAP_FACTOR * 2
        assert "frame cap" in caplog.text


class TestRunPoint:
    """Tests for run_point."""

    def test_minimum_frames_only(self, small_cfg: SimConfig) -> None:
        """With no error target the point runs exactly cfg.frames frames."""
        record = run_point(small_cfg, 10.0)
        assert record.frames == 2
        assert record.bits_sent == 96
        assert record.modulation == "qpsk"
        assert record.seed == 2014

    def test_noiseless_point_hits_cap(self, small_cfg: SimConfig) -> None:
        """An unreachable error target ends at 10x frames."""
        cfg = small_cfg.model_copy(update={"min_bit_errors": 1})
        record = run_point(cfg, float("inf"), snr_index=0)
        assert record.frames == FRAME_CAP_FACTOR * cfg.frames
        assert record.bit_errors == 0

    def test_batch_size_does_not_change_record(self, small_cfg: SimConfig) -> None:
        """Truncation at the stopping index makes batching invisible."""
        cfg = small_cfg.model_copy(update={"min_bit_errors": 40, "coding": "none"})
        one = run_point(cfg, -5.0, batch_frames=1)
        many = run_point(cfg, -5.0, batch_frames=7)
        assert one == many

    def test_executor_matches_inline(self, small_cfg: SimConfig) -> None:
        """Pooled frames give the same record as inline frames."""
        cfg = small_cfg.model_copy(update={"min_bit_errors": 20, "coding": "none"})
        inline = run_point(cfg, 0.0)
        with ThreadPoolExecutor(max_workers=3) as pool:
            pooled = run_point(cfg, 0.0, executor=pool)
        assert inline == pooled

    def test_bad_batch_rejected(self, small_cfg: SimConfig) -> None:
        """batch_frames must be positive."""
        with pytest.raises(ValueError):
            run_point(small_cfg, 0.0, batch_frames=0)

    def test_frame_failure_is_wrapped(self, small_cfg: SimConfig) -> None:
        """Errors inside a frame surface as SimulationError."""
        with patch("src.runner.run_frame", side_effect=RuntimeError("boom")):
            with pytest.raises(SimulationError, match=r"qpsk @ 5 dB failed: RuntimeError: boom"):
                run_point(small_cfg, 5.0)


class TestRunSweep:
    """Tests for run_sweep."""

    def test_order_is_modulation_then_snr(self, small_cfg: SimConfig) -> None:
        """Records follow configured modulations, then ascending SNR."""
        cfg = small_cfg.model_copy(update={"modulations": ("8psk", "qpsk")})
        records = run_sweep(cfg)
        assert [(r.modulation, r.snr_db) for r in records] == [
            ("8psk", 0.0), ("8psk", 5.0), ("8psk", 10.0),
            ("qpsk", 0.0), ("qpsk", 5.0), ("qpsk", 10.0),
        ]

    def test_sweep_point_equals_run_point(self, small_cfg: SimConfig) -> None:
        """A sweep record matches the standalone point on the same key."""
        records = run_sweep(small_cfg)
        assert records[1] == run_point(small_cfg, 5.0)

    def test_bad_batch_rejected(self, small_cfg: SimConfig) -> None:
        """batch_frames must be positive."""
        with pytest.raises(ValueError):
            run_sweep(small_cfg, batch_frames=0)


class TestMakeExecutor:
    """Tests for make_executor."""

    def test_rejects_zero_workers(self) -> None:
        """A pool needs at least one worker."""
        with pytest.raises(ValueError):
            make_executor(0)

    def test_workers_inherit_log_level(self) -> None:
        """Pool workers are initialised with the parent's effective level."""
        root = logging.getLogger()
        original_level = root.level
        root.setLevel(logging.DEBUG)
        try:
            with patch("src.runner.ProcessPoolExecutor") as pool:
                make_executor(3)
        finally:
            root.setLevel(original_level)

        kwargs = pool.call_args.kwargs
        assert kwargs["max_workers"] == 3
        assert kwargs["initializer"] is setup_worker_logging
        assert kwargs["initargs"] == (logging.DEBUG,)
