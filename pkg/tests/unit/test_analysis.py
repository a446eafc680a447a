"""Unit tests for BER curve metrics and the diversity reference."""

import math

import numpy as np
import pytest

from src.analysis import (
    PUBLISHED_GAINS_DB,
    ber_at_snr,
    ber_sigma,
    curve,
    ebn0_offset_db,
    error_free_snr,
    gain_table,
    gain_vs_reference,
    mrc_ber_qpsk,
    mrc_ber_qpsk_monte_carlo,
    snr_at_ber,
)
from src.runner import BerRecord


def _records(modulation: str, points: list[tuple[float, int]], bits: int = 1000) -> list[BerRecord]:
    return [
        BerRecord(
            snr_db=snr, modulation=modulation, detector="zf", users=1,
            frames=1, bits_sent=bits, bit_errors=errors, seed=0,
        )
        for snr, errors in points
    ]


class TestCurve:
    """Tests for curve extraction."""

    def test_sorted_and_filtered(self) -> None:
        """Only the requested modulation, ascending SNR."""
        recs = _records("qpsk", [(2.0, 10), (0.0, 100)]) + _records("8psk", [(1.0, 5)])
        assert curve(recs, "qpsk") == [(0.0, 0.1), (2.0, 0.01)]

    def test_zero_errors_enter_as_half_error(self) -> None:
        """Error-free points become 0.5 / bits_sent."""
        assert curve(_records("qpsk", [(4.0, 0)]), "qpsk") == [(4.0, 0.0005)]


class TestSnrAtBer:
    """Tests for snr_at_ber."""

    def test_log_linear_interpolation(self) -> None:
        """Halfway in log10(BER) is halfway in SNR."""
        recs = _records("qpsk", [(0.0, 100), (2.0, 1)])
        assert snr_at_ber(recs, "qpsk", 0.01) == pytest.approx(1.0)

    def test_exact_grid_point(self) -> None:
        """Target equal to a grid BER returns that SNR."""
        recs = _records("qpsk", [(0.0, 100), (2.0, 10), (4.0, 1)])
        assert snr_at_ber(recs, "qpsk", 0.01) == pytest.approx(2.0)

    def test_not_reached_is_none(self) -> None:
        """A curve that stays above the target yields None."""
        recs = _records("qpsk", [(0.0, 400), (2.0, 300)])
        assert snr_at_ber(recs, "qpsk", 0.01) is None

    def test_unknown_modulation_is_none(self) -> None:
        """No points, no crossing."""
        assert snr_at_ber(_records("qpsk", [(0.0, 1)]), "64qam", 0.01) is None

    @pytest.mark.parametrize("target", [0.0, 1.0, -0.1])
    def test_target_out_of_range(self, target: float) -> None:
        """Target BER must lie in (0, 1)."""
        with pytest.raises(ValueError):
            snr_at_ber([], "qpsk", target)


class TestBerAtSnr:
    """Tests for ber_at_snr."""

    def test_interpolates_between_points(self) -> None:
        """Geometric mean at the SNR midpoint."""
        recs = _records("qpsk", [(0.0, 100), (2.0, 1)])
        assert ber_at_snr(recs, "qpsk", 1.0) == pytest.approx(0.01)

    def test_off_grid_is_none(self) -> None:
        """Outside the simulated range there is no value."""
        assert ber_at_snr(_records("qpsk", [(0.0, 100), (2.0, 1)]), "qpsk", 5.0) is None

    def test_last_grid_point(self) -> None:
        """The final grid point is inside the range."""
        recs = _records("qpsk", [(0.0, 100), (2.0, 1)])
        assert ber_at_snr(recs, "qpsk", 2.0) == pytest.approx(0.001)


class TestGains:
    """Tests for gain_vs_reference and gain_table."""

    def _sweep(self) -> list[BerRecord]:
        return (
            _records("qpsk", [(-2.0, 100), (0.0, 1)])
            + _records("64qam", [(8.0, 100), (10.0, 1)])
            + _records("16qam", [(0.0, 400), (10.0, 300)])
        )

    def test_gain_is_snr_difference(self) -> None:
        """QPSK reaches 1e-2 at -1 dB, 64-QAM at 9 dB."""
        gains = gain_vs_reference(self._sweep(), "64qam", 0.01)
        assert gains["qpsk"] == pytest.approx(10.0)
        assert gains["64qam"] == pytest.approx(0.0)
        assert gains["16qam"] is None

    def test_reference_not_reached(self, caplog: pytest.LogCaptureFixture) -> None:
        """All gains are None when the reference never crosses."""
        recs = _records("qpsk", [(0.0, 100), (2.0, 1)]) + _records("64qam", [(0.0, 400)])
        gains = gain_vs_reference(recs, "64qam", 0.01)
        assert gains == {"qpsk": None, "64qam": None}
        assert "never reaches" in caplog.text

    def test_gain_table_rows(self) -> None:
        """Rows carry fixed-SNR BER, error-free SNR and published figures."""
        rows = {row.modulation: row for row in gain_table(self._sweep(), "64qam", 0.01, -1.0)}
        assert rows["qpsk"].gain_db == pytest.approx(10.0)
        assert rows["qpsk"].ber_at_fixed_snr == pytest.approx(0.01)
        assert rows["qpsk"].published_gain_db == PUBLISHED_GAINS_DB["qpsk"]
        assert rows["64qam"].ber_at_fixed_snr is None
        assert rows["16qam"].gain_db is None

    def test_published_only_against_64qam(self) -> None:
        """Published gains are quoted relative to 64-QAM only."""
        rows = gain_table(self._sweep(), "qpsk", 0.01, -1.0)
        assert all(row.published_gain_db is None for row in rows)


class TestErrorFreeSnr:
    """Tests for error_free_snr."""

    def test_first_of_trailing_zero_run(self) -> None:
        """An isolated zero followed by errors does not count."""
        recs = _records("qpsk", [(0.0, 5), (1.0, 0), (2.0, 1), (3.0, 0), (4.0, 0)])
        assert error_free_snr(recs, "qpsk") == 3.0

    def test_never_error_free(self) -> None:
        """Errors at the last point give None."""
        assert error_free_snr(_records("qpsk", [(0.0, 5)]), "qpsk") is None


class TestHelpers:
    """Tests for Eb/N0 offset and binomial sigma."""

    def test_ebn0_offset_reference_qpsk(self) -> None:
        """QPSK, rate 1/2, SF 8: 10 log10(8 / 1) = 9.03 dB."""
        assert ebn0_offset_db(2, 0.5, 8) == pytest.approx(10 * math.log10(8))

    def test_ebn0_offset_unspread_uncoded(self) -> None:
        """Uncoded unspread QPSK loses 3 dB per bit."""
        assert ebn0_offset_db(2, 1.0, 1) == pytest.approx(-10 * math.log10(2))

    def test_ebn0_offset_rejects_bad_rate(self) -> None:
        """Rates must be positive."""
        with pytest.raises(ValueError):
            ebn0_offset_db(2, 0.0, 8)

    def test_ber_sigma(self) -> None:
        """sqrt(p (1 - p) / n)."""
        record = _records("qpsk", [(0.0, 100)])[0]
        assert ber_sigma(record) == pytest.approx(math.sqrt(0.1 * 0.9 / 1000))


class TestDiversityReference:
    """Tests for the analytic Rayleigh MRC reference."""

    def test_single_branch_at_zero_db(self) -> None:
        """L = 1, gamma = 1: mu = sqrt(0.5 / 2.5)."""
        mu = math.sqrt(0.5 / 2.5)
        assert mrc_ber_qpsk(0.0, branches=1) == pytest.approx((1 - mu) / 2)

    def test_more_branches_lower_ber(self) -> None:
        """Diversity order reduces the error rate at fixed SNR."""
        values = [mrc_ber_qpsk(5.0, branches=L) for L in (1, 2, 4, 8)]
        assert values == sorted(values, reverse=True)

    def test_slope_matches_diversity_order(self) -> None:
        """At high SNR the 8-branch curve falls ~8 decades per 10 dB."""
        slope = math.log10(mrc_ber_qpsk(30.0) / mrc_ber_qpsk(40.0))
        assert slope == pytest.approx(8.0, abs=0.2)

    def test_monte_carlo_agrees_with_closed_form(self) -> None:
        """Channel averaging reproduces the closed form within 3%."""
        rng = np.random.default_rng(8)
        estimate = mrc_ber_qpsk_monte_carlo(0.0, 400000, rng)
        assert estimate == pytest.approx(mrc_ber_qpsk(0.0), rel=0.03)

    def test_bad_branches(self) -> None:
        """At least one branch."""
        with pytest.raises(ValueError):
            mrc_ber_qpsk(0.0, branches=0)
