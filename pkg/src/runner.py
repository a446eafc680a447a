"""Monte-Carlo BER engine: SNR points, sweeps and the worker pool.

Every frame draws from its own random stream keyed by
(master_seed, snr_index, frame_index), so a frame's outcome does not
depend on which worker runs it or when. A point stops at the first frame
count n >= frames whose cumulative errors reach min_bit_errors (or at the
10x frames cap); frames simulated past that index are discarded. Records
are therefore identical for any worker count.

Example:
    >>> from src.config import parse_config
    >>> from src.runner import run_sweep
    >>> cfg = parse_config("modulation = qpsk\\nsnr = 0:5:10\\nframes = 2\\nreference =")
    >>> records = run_sweep(cfg, workers=4)
    >>> [r.snr_db for r in records]
    [0.0, 5.0, 10.0]
"""

from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from concurrent.futures import Executor, Future, ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field

from src.config import SimConfig
from src.link import run_frame
from src.utils.logging_config import setup_worker_logging

logger = logging.getLogger(__name__)

# Frame cap relative to cfg.frames.
FRAME_CAP_FACTOR = 10

DEFAULT_BATCH_FRAMES = 10

# Stream keys for points off the configured grid start here (millidecibel offset).
OFF_GRID_KEY_BASE = 1 << 31


class SimulationError(Exception):
    """Raised when a frame fails inside the engine.

    Example:
        >>> raise SimulationError("qpsk", 3.0, "singular channel")
    """

    def __init__(self, modulation: str, snr_db: float, error: str) -> None:
        self.modulation = modulation
        self.snr_db = snr_db
        self.error = error
        super().__init__(f"Point {modulation} @ {snr_db:g} dB failed: {error}")


class BerRecord(BaseModel):
    """Accumulated result of one (modulation, SNR) point.

    Example:
        >>> r = BerRecord(snr_db=0.0, modulation="qpsk", detector="zf", users=1,
        ...               frames=10, bits_sent=10400, bit_errors=52, seed=2014)
        >>> r.ber
        0.005
    """

    model_config = ConfigDict(frozen=True)

    snr_db: float
    modulation: str
    detector: str
    users: int = Field(ge=1)
    frames: int = Field(ge=0)
    bits_sent: int = Field(ge=0)
    bit_errors: int = Field(ge=0)
    seed: int

    @computed_field  # type: ignore[prop-decorator]
    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_sent if self.bits_sent else 0.0


def frame_rng(master_seed: int, snr_index: int, frame_index: int) -> np.random.Generator:
    """Independent random stream of one frame."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(snr_index, frame_index))
    return np.random.default_rng(seq)


def simulate_frame(
    cfg: SimConfig, modulation: str, snr_db: float, snr_index: int, frame_index: int
) -> tuple[int, int, int]:
    """Worker job: (bit_errors, bits_sent, redraws) of one keyed frame."""
    result = run_frame(cfg, snr_db, frame_rng(cfg.master_seed, snr_index, frame_index), modulation)
    return result.bit_errors, result.bits_sent, result.redraws


def _stream_key(cfg: SimConfig, snr_db: float, snr_index: int | None) -> int:
    if snr_index is not None:
        if snr_index < 0:
            raise ValueError(f"snr_index must be >= 0, got {snr_index}")
        return snr_index
    on_grid = cfg.snr_index(snr_db)
    if on_grid is not None:
        return on_grid
    return OFF_GRID_KEY_BASE + round(snr_db * 1000)


@dataclass
class _PointState:
    """Frames gathered so far for one point, in frame order."""

    cfg: SimConfig
    modulation: str
    snr_db: float
    key: int
    batch: int
    outcomes: list[tuple[int, int, int]] = field(default_factory=list)
    stop_at: int | None = None
    started: float = field(default_factory=time.monotonic)

    @property
    def cap(self) -> int:
        return FRAME_CAP_FACTOR * self.cfg.frames

    def next_frames(self) -> range:
        done = len(self.outcomes)
        target = self.cfg.frames if done == 0 else min(self.cap, done + self.batch)
        return range(done, target)

    def absorb(self, outcomes: Sequence[tuple[int, int, int]]) -> None:
        self.outcomes.extend(outcomes)
        errors = 0
        for n, (frame_errors, _, _) in enumerate(self.outcomes, start=1):
            errors += frame_errors
            if n >= self.cfg.frames and errors >= self.cfg.min_bit_errors:
                self.stop_at = n
                return
        if len(self.outcomes) >= self.cap:
            self.stop_at = self.cap

    @property
    def done(self) -> bool:
        return self.stop_at is not None

    def record(self) -> BerRecord:
        assert self.stop_at is not None
        kept = self.outcomes[: self.stop_at]
        errors = sum(o[0] for o in kept)
        bits = sum(o[1] for o in kept)
        redraws = sum(o[2] for o in kept)
        if errors < self.cfg.min_bit_errors:
            logger.warning(
                "%s @ %g dB: frame cap %d reached with %d < %d errors",
                self.modulation,
                self.snr_db,
                self.cap,
                errors,
                self.cfg.min_bit_errors,
            )
        record = BerRecord(
            snr_db=self.snr_db,
            modulation=self.modulation,
            detector=self.cfg.detector,
            users=self.cfg.users,
            frames=len(kept),
            bits_sent=bits,
            bit_errors=errors,
            seed=self.cfg.master_seed,
        )
        logger.info(
            "%s @ %g dB: %d/%d errors, BER %.3e, %d frames, %d redraws (%.1fs)",
            self.modulation,
            self.snr_db,
            errors,
            bits,
            record.ber,
            record.frames,
            redraws,
            time.monotonic() - self.started,
        )
        return record


_Job = tuple[SimConfig, str, float, int, int]


def _jobs(state: _PointState) -> list[_Job]:
    return [
        (state.cfg, state.modulation, state.snr_db, state.key, i) for i in state.next_frames()
    ]


def _failed(state: _PointState, error: Exception) -> SimulationError:
    return SimulationError(state.modulation, state.snr_db, f"{type(error).__name__}: {error}")


def _drive(states: Sequence[_PointState], executor: Executor | None) -> None:
    """Advance all points round by round until each has a stopping frame."""
    while True:
        active = [s for s in states if not s.done]
        if not active:
            return
        if executor is None:
            for state in active:
                try:
                    outcomes = [simulate_frame(*job) for job in _jobs(state)]
                except Exception as e:
                    raise _failed(state, e) from e
                state.absorb(outcomes)
            continue
        submitted: list[tuple[_PointState, list[Future[tuple[int, int, int]]]]] = [
            (state, [executor.submit(simulate_frame, *job) for job in _jobs(state)])
            for state in active
        ]
        for state, futures in submitted:
            try:
                outcomes = [f.result() for f in futures]
            except Exception as e:
                raise _failed(state, e) from e
            state.absorb(outcomes)


def run_point(
    cfg: SimConfig,
    snr_db: float,
    modulation: str | None = None,
    snr_index: int | None = None,
    executor: Executor | None = None,
    batch_frames: int = DEFAULT_BATCH_FRAMES,
) -> BerRecord:
    """Simulate one (modulation, SNR) point until the stopping rule holds.

    Args:
        cfg: Experiment configuration.
        snr_db: Point SNR in dB.
        modulation: Scheme; defaults to the first configured one.
        snr_index: Stream key of the point; defaults to its grid position.
        executor: Optional pool; frames run inline when None.
        batch_frames: Extra frames requested per round after the first
            cfg.frames.

    Returns:
        Record over the frames up to the stopping index.

    Raises:
        SimulationError: A frame failed.
    """
    if batch_frames < 1:
        raise ValueError(f"batch_frames must be >= 1, got {batch_frames}")
    name = modulation or cfg.modulations[0]
    state = _PointState(
        cfg=cfg,
        modulation=name,
        snr_db=snr_db,
        key=_stream_key(cfg, snr_db, snr_index),
        batch=batch_frames,
    )
    _drive([state], executor)
    return state.record()


def make_executor(workers: int) -> Executor:
    """Process pool running frame jobs, logging like the parent process."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return ProcessPoolExecutor(
        max_workers=workers,
        initializer=setup_worker_logging,
        initargs=(logging.getLogger().getEffectiveLevel(),),
    )


def run_sweep(
    cfg: SimConfig,
    workers: int = 1,
    batch_frames: int = DEFAULT_BATCH_FRAMES,
) -> list[BerRecord]:
    """Simulate every configured modulation over the SNR grid.

    All points are scheduled together: each round submits the pending
    frames of every unfinished point to the pool.

    Args:
        cfg: Experiment configuration.
        workers: Pool size; 1 runs frames in the calling process.
        batch_frames: Extra frames per round for points that need more.

    Returns:
        Records ordered by configured modulation, then ascending SNR.

    Raises:
        SimulationError: A frame failed.
    """
    if batch_frames < 1:
        raise ValueError(f"batch_frames must be >= 1, got {batch_frames}")
    points = cfg.snr_points()
    states = [
        _PointState(cfg=cfg, modulation=m, snr_db=snr, key=i, batch=batch_frames)
        for m in cfg.modulations
        for i, snr in enumerate(points)
    ]
    logger.info(
        "Sweep: %d modulation(s) x %d SNR point(s), detector=%s, users=%d, workers=%d",
        len(cfg.modulations),
        len(points),
        cfg.detector,
        cfg.users,
        workers,
    )
    started = time.monotonic()
    if workers <= 1:
        _drive(states, None)
    else:
        with make_executor(workers) as executor:
            _drive(states, executor)
    records = [s.record() for s in states]
    logger.info("Sweep finished: %d record(s) in %.1fs", len(records), time.monotonic() - started)
    return records
