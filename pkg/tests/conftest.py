"""Pytest configuration and shared fixtures."""

from pathlib import Path

import numpy as np
import pytest

from src.config import SimConfig


@pytest.fixture
def project_root() -> Path:
    """Return the project root directory."""
    return Path(__file__).parent.parent


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator so statistical assertions are reproducible."""
    return np.random.default_rng(20140501)


@pytest.fixture
def small_cfg() -> SimConfig:
    """Desk-sized link: short frames on a 64-subcarrier grid."""
    return SimConfig(
        modulations=("qpsk",),
        snr_grid=(0.0, 5.0, 10.0),
        msg_bits_per_frame=48,
        n_subcarriers=64,
        cp_len=16,
        frames=2,
        min_bit_errors=0,
        reference_modulation=None,
    )
