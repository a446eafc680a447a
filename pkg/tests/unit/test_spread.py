"""Unit tests for spreading codes and chip handling."""

import numpy as np
import pytest

from src.phy.common import DegenerateStateError, RaggedBlockError
from src.phy.spread import (
    DEFAULT_PN_POLY,
    SpreadingCode,
    dequantize_chips,
    despread,
    level_width,
    make_codes,
    pn_code,
    pn_generate,
    quantize_chips,
    spread,
    superpose,
    walsh_code,
    walsh_generate,
)


class TestPnGenerate:
    """Tests for the LFSR chip generator."""

    def test_default_poly_is_maximal_length(self) -> None:
        """x^7 + x^6 + 1 repeats after 127 chips."""
        chips = pn_generate(DEFAULT_PN_POLY, seed=1, count=254)
        assert np.array_equal(chips[:127], chips[127:])
        assert not np.array_equal(chips[:63], chips[1:64])

    def test_m_sequence_balance(self) -> None:
        """One period holds 64 ones (chip -1) and 63 zeros (chip +1)."""
        chips = pn_generate(DEFAULT_PN_POLY, seed=5, count=127)
        assert int(np.sum(chips == -1.0)) == 64
        assert int(np.sum(chips == 1.0)) == 63

    def test_same_seed_same_chips(self) -> None:
        """Generation is deterministic in the seed."""
        a = pn_generate(DEFAULT_PN_POLY, seed=9, count=32)
        b = pn_generate(DEFAULT_PN_POLY, seed=9, count=32)
        assert np.array_equal(a, b)

    def test_zero_seed_raises(self) -> None:
        """All-zero register would never leave state zero."""
        with pytest.raises(DegenerateStateError, match="degenerate LFSR state"):
            pn_generate(DEFAULT_PN_POLY, seed=0, count=8)

    def test_seed_outside_register_is_degenerate(self) -> None:
        """Only the low deg(poly) bits of the seed are used."""
        with pytest.raises(DegenerateStateError):
            pn_generate(DEFAULT_PN_POLY, seed=1 << 7, count=8)

    def test_negative_count_raises(self) -> None:
        """count must be non-negative."""
        with pytest.raises(ValueError):
            pn_generate(DEFAULT_PN_POLY, seed=1, count=-1)


class TestWalsh:
    """Tests for Walsh rows."""

    def test_rows_are_orthogonal(self) -> None:
        """Distinct rows of order 8 have zero inner product."""
        rows = np.stack([walsh_generate(8, u) for u in range(8)])
        assert np.array_equal(rows @ rows.T, 8 * np.eye(8))

    def test_row_zero_is_all_ones(self) -> None:
        """Sylvester ordering starts with the constant row."""
        assert walsh_generate(4, 0).tolist() == [1.0, 1.0, 1.0, 1.0]

    def test_order_must_be_power_of_two(self) -> None:
        """Order 6 is rejected."""
        with pytest.raises(ValueError, match="power of two"):
            walsh_generate(6, 0)

    def test_user_id_out_of_range(self) -> None:
        """User id must index a row."""
        with pytest.raises(ValueError):
            walsh_generate(8, 8)


class TestSpreadingCode:
    """Tests for SpreadingCode validation and factories."""

    def test_rejects_non_antipodal_chips(self) -> None:
        """Chips other than +/-1 are invalid."""
        with pytest.raises(ValueError):
            SpreadingCode(kind="walsh", chips=(1.0, 0.0))

    def test_rejects_empty_chips(self) -> None:
        """A code needs at least one chip."""
        with pytest.raises(ValueError):
            SpreadingCode(kind="pn_lfsr", chips=())

    def test_pn_code_length(self) -> None:
        """PN signature length equals the spreading factor."""
        assert pn_code(8, user_id=2).spreading_factor == 8

    def test_make_codes_assigns_user_ids(self) -> None:
        """One code per user, ids in order."""
        codes = make_codes("walsh", 8, 3)
        assert [c.user_id for c in codes] == [0, 1, 2]
        assert all(c.kind == "walsh" for c in codes)


class TestSpreadDespread:
    """Tests for spread, despread and superposition."""

    def test_spread_maps_bit_to_signed_code(self) -> None:
        """Bit 0 sends the code, bit 1 sends its negation."""
        code = walsh_code(4, user_id=1)
        chips = spread([0, 1], code)
        assert chips.tolist() == [1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0, 1.0]

    def test_roundtrip_single_user(self, rng: np.random.Generator) -> None:
        """Clean chips despread to the original bits."""
        bits = rng.integers(0, 2, 100, dtype=np.uint8)
        code = pn_code(8)
        assert np.array_equal(despread(spread(bits, code), code), bits)

    def test_walsh_users_separate_after_superposition(self, rng: np.random.Generator) -> None:
        """Eight Walsh users on SF=8 decode without interference."""
        codes = make_codes("walsh", 8, 8)
        bits = [rng.integers(0, 2, 40, dtype=np.uint8) for _ in codes]
        total = superpose([spread(b, c) for b, c in zip(bits, codes, strict=True)])
        for b, c in zip(bits, codes, strict=True):
            assert np.array_equal(despread(total, c), b)

    def test_zero_correlation_decodes_as_zero(self) -> None:
        """Only strictly negative correlation yields bit 1."""
        code = walsh_code(2, user_id=0)
        assert despread([1.0, -1.0], code).tolist() == [0]

    def test_ragged_block_raises(self) -> None:
        """Chip count must be a multiple of the spreading factor."""
        with pytest.raises(RaggedBlockError, match="ragged chip block"):
            despread(np.ones(13), pn_code(8))


class TestChipQuantization:
    """Tests for superposed chip to bit mapping."""

    def test_level_width(self) -> None:
        """users + 1 levels need ceil(log2(users + 1)) bits."""
        assert [level_width(u) for u in (1, 2, 3, 4, 7, 8)] == [1, 2, 2, 3, 3, 4]

    def test_single_user_is_plain_chip_map(self) -> None:
        """+1 -> 0 and -1 -> 1 for one user."""
        assert quantize_chips([1.0, -1.0, -1.0], users=1).tolist() == [0, 1, 1]

    def test_gray_levels_for_three_users(self) -> None:
        """Levels 0..3 map to Gray words 00, 01, 11, 10."""
        bits = quantize_chips([3.0, 1.0, -1.0, -3.0], users=3)
        assert bits.tolist() == [0, 0, 0, 1, 1, 1, 1, 0]

    def test_roundtrip_superposed_levels(self, rng: np.random.Generator) -> None:
        """dequantize inverts quantize for every reachable level."""
        users = 5
        chips = users - 2.0 * rng.integers(0, users + 1, 200)
        assert np.array_equal(dequantize_chips(quantize_chips(chips, users), users), chips)

    def test_unreachable_level_raises(self) -> None:
        """A sum of two antipodal chips cannot be 1."""
        with pytest.raises(ValueError):
            quantize_chips([1.0], users=2)

    def test_out_of_range_level_is_clipped(self) -> None:
        """Gray word 10 (level 3) clips to level 2 for two users."""
        assert dequantize_chips([1, 0], users=2).tolist() == [-2.0]

    def test_ragged_level_block_raises(self) -> None:
        """Bit count must be a multiple of the level width."""
        with pytest.raises(RaggedBlockError):
            dequantize_chips([1, 0, 1], users=3)
