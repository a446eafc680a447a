"""End-to-end MIMO-MC-CDMA frame: transmitter, channel and receiver.

One frame runs the chain

    message -> conv_encode -> spread (+ user superposition) -> map_bits
    -> Alamouti pairing -> OFDM grid -> per-antenna ofdm_modulate
    -> Rayleigh block fading + AWGN per subcarrier
    -> ofdm_demodulate -> ZF / real LS / ML detection -> demap_hard
    -> despread -> viterbi_decode -> bit comparison

Alamouti block b rides subcarrier b mod N of OFDM-symbol pair b // N;
slot 1 goes on the even row of the pair, slot 2 on the odd row. Every
block sees its own 4x2 channel draw. Zero padding added on the way in
is recorded in FrameMeta and stripped on the way out.

Example:
    >>> import numpy as np
    >>> from src.config import SimConfig
    >>> from src.link import run_frame
    >>> cfg = SimConfig(modulations=("qpsk",), msg_bits_per_frame=64, n_subcarriers=64,
    ...                 cp_len=16, reference_modulation=None)
    >>> result = run_frame(cfg, float("inf"), np.random.default_rng(0))
    >>> result.bit_errors, result.bits_sent
    (0, 64)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cache

import numpy as np

from src.config import SimConfig
from src.phy.channel import NoiseSpec, draw_channel, transmit
from src.phy.common import BitBlock, ComplexArray, SingularChannelError
from src.phy.fec import ConvCode, conv_encode, hamming_distance, viterbi_decode
from src.phy.mimo import (
    AlamoutiBlock,
    alamouti_pair,
    effective_channel,
    ml_detect,
    real_decompose,
    real_ls_detect,
    stack_received,
    zf_detect,
    zf_weights,
)
from src.phy.modem import ModulationScheme, demap_hard, get_scheme, map_bits
from src.phy.ofdm import OfdmGrid, ofdm_demodulate, ofdm_modulate
from src.phy.spread import (
    SpreadingCode,
    dequantize_chips,
    despread,
    make_codes,
    quantize_chips,
    spread,
    superpose,
)

logger = logging.getLogger(__name__)

# Rounds of singular-channel redraws before a frame gives up.
MAX_REDRAW_ROUNDS = 100


@dataclass(frozen=True)
class FrameMeta:
    """Padding introduced by the transmitter.

    Attributes:
        pad_chips: Zero bits appended to fill the last constellation symbol.
        pad_symbols: Grid positions per antenna stream not carrying data.
        ofdm_symbols: OFDM symbols per antenna stream.
    """

    pad_chips: int
    pad_symbols: int
    ofdm_symbols: int


@dataclass(frozen=True)
class FrameResult:
    """Outcome of one simulated frame."""

    bit_errors: int
    bits_sent: int
    redraws: int
    meta: FrameMeta


@dataclass(frozen=True, eq=False)
class LinkPlan:
    """Per-configuration constants shared by every frame of a point."""

    scheme: ModulationScheme
    codes: tuple[SpreadingCode, ...]
    conv: ConvCode
    grid: OfdmGrid
    users: int
    coded: bool


@cache
def plan_link(cfg: SimConfig, modulation: str) -> LinkPlan:
    """Build (and memoise) the scheme, signatures and code of a link."""
    return LinkPlan(
        scheme=get_scheme(modulation),
        codes=tuple(make_codes(cfg.code_kind, cfg.spreading_factor, cfg.users)),
        conv=cfg.conv_code,
        grid=cfg.grid,
        users=cfg.users,
        coded=cfg.coding == "conv",
    )


def frame_layout(cfg: SimConfig, modulation: str) -> FrameMeta:
    """Padding and OFDM symbol count of a frame, without simulating it.

    Example:
        >>> from src.config import SimConfig
        >>> frame_layout(SimConfig(), "qpsk")
        FrameMeta(pad_chips=0, pad_symbols=4480, ofdm_symbols=2)
    """
    scheme = get_scheme(modulation)
    if cfg.coding == "conv":
        coded = len(cfg.conv_code.generators) * (
            cfg.msg_bits_per_frame + (cfg.conv_code.memory if cfg.terminated else 0)
        )
    else:
        coded = cfg.msg_bits_per_frame
    chip_bits = coded * cfg.spreading_factor * cfg.chip_width
    pad_chips = (-chip_bits) % scheme.bits_per_symbol
    n_symbols = (chip_bits + pad_chips) // scheme.bits_per_symbol
    pairs = math.ceil(math.ceil(n_symbols / 2) / cfg.n_subcarriers)
    positions = 2 * pairs * cfg.n_subcarriers
    return FrameMeta(pad_chips=pad_chips, pad_symbols=positions - n_symbols, ofdm_symbols=2 * pairs)


def _to_streams(per_block: ComplexArray, n_subcarriers: int) -> ComplexArray:
    """(B, A antennas, 2 slots) -> (A, 2P*N) serial streams, zero-padded to P*N blocks."""
    blocks, antennas = per_block.shape[0], per_block.shape[1]
    pairs = max(1, math.ceil(blocks / n_subcarriers))
    padded = np.zeros((pairs * n_subcarriers, antennas, 2), dtype=np.complex128)
    padded[:blocks] = per_block
    streams = padded.reshape(pairs, n_subcarriers, antennas, 2).transpose(2, 0, 3, 1)
    return streams.reshape(antennas, -1)


def _from_streams(streams: ComplexArray, n_subcarriers: int) -> ComplexArray:
    """(A, 2P*N) streams -> (P*N, A, 2 slots) per-block view."""
    count = streams.shape[0]
    pairs = streams.shape[1] // (2 * n_subcarriers)
    per_block = streams.reshape(count, pairs, 2, n_subcarriers).transpose(1, 3, 0, 2)
    return per_block.reshape(pairs * n_subcarriers, count, 2)


def _draw_nonsingular(
    nr: int, rng: np.random.Generator, blocks: int, active: int
) -> tuple[ComplexArray, int]:
    """Channel per block; active blocks whose ZF Gram matrix is singular are redrawn."""
    h = draw_channel(nr, 2, rng, blocks=blocks)
    redraws = 0
    for _ in range(MAX_REDRAW_ROUNDS):
        try:
            zf_weights(effective_channel(h[:active]))
            return h, redraws
        except SingularChannelError as e:
            idx = np.asarray(e.indices, dtype=np.int64)
            h[idx] = draw_channel(nr, 2, rng, blocks=idx.size)
            redraws += int(idx.size)
            logger.debug("Redrew %d singular channel block(s)", idx.size)
    raise SingularChannelError(list(range(active)), math.inf)


def _detect(
    detector: str, stacked: ComplexArray, h_eff: ComplexArray, scheme: ModulationScheme
) -> ComplexArray:
    if detector == "zf":
        return zf_detect(stacked, h_eff)
    if detector == "real_ls":
        h_real, y_real = real_decompose(h_eff, stacked)
        return real_ls_detect(h_real, y_real)
    if detector == "ml":
        return ml_detect(stacked, h_eff, scheme)
    raise ValueError(f"unknown detector '{detector}'")


def _encode(plan: LinkPlan, message: BitBlock) -> BitBlock:
    return conv_encode(message, plan.conv) if plan.coded else message


def _decode(plan: LinkPlan, coded: BitBlock) -> BitBlock:
    return viterbi_decode(coded, plan.conv) if plan.coded else coded


def run_frame(
    cfg: SimConfig, snr_db: float, rng: np.random.Generator, modulation: str | None = None
) -> FrameResult:
    """Simulate one frame and count decoded message bit errors.

    Args:
        cfg: Experiment configuration.
        snr_db: Symbol SNR per receive antenna; +inf disables noise.
        rng: Frame random stream (messages, channels, noise in that order).
        modulation: Scheme to use; defaults to the first configured one.

    Returns:
        Errors over msg_bits_per_frame * users message bits.

    Raises:
        SingularChannelError: Redrawing did not clear a singular channel.
    """
    plan = plan_link(cfg, modulation or cfg.modulations[0])
    grid = plan.grid
    n = grid.n_subcarriers

    # Transmitter
    messages = rng.integers(0, 2, size=(plan.users, cfg.msg_bits_per_frame), dtype=np.uint8)
    chips = superpose(
        [spread(_encode(plan, msg), code) for msg, code in zip(messages, plan.codes, strict=True)]
    )
    symbols = map_bits(quantize_chips(chips, plan.users), plan.scheme)
    n_symbols = len(symbols)
    pairs = alamouti_pair(symbols.symbols)
    n_blocks = int(pairs.tx.shape[0])
    streams = _to_streams(np.swapaxes(pairs.tx, -1, -2), n)
    waveforms = [ofdm_modulate(stream, grid) for stream in streams]
    positions = streams.shape[1]
    meta = FrameMeta(
        pad_chips=symbols.pad_bits,
        pad_symbols=positions - n_symbols,
        ofdm_symbols=positions // n,
    )

    # Channel: per-subcarrier view of each transmit waveform, block fading, AWGN
    freq = np.stack([ofdm_demodulate(w.samples, grid, positions) for w in waveforms])
    on_air = AlamoutiBlock.from_tx(np.swapaxes(_from_streams(freq, n), -1, -2))
    h, redraws = _draw_nonsingular(cfg.nr, rng, on_air.tx.shape[0], n_blocks)
    y_blocks = transmit(on_air, h, NoiseSpec.from_snr_db(snr_db), rng)
    rx_waveforms = [ofdm_modulate(stream, grid) for stream in _to_streams(y_blocks, n)]

    # Receiver
    rx_freq = np.stack([ofdm_demodulate(w.samples, grid, positions) for w in rx_waveforms])
    y = _from_streams(rx_freq, n)[:n_blocks]
    h_eff = effective_channel(h[:n_blocks]) / np.sqrt(2)
    estimates = _detect(cfg.detector, stack_received(y), h_eff, plan.scheme)
    chip_bits = demap_hard(estimates.reshape(-1)[:n_symbols], plan.scheme)
    levels = dequantize_chips(chip_bits[: chip_bits.size - symbols.pad_bits], plan.users)

    errors = 0
    for msg, code in zip(messages, plan.codes, strict=True):
        decoded = _decode(plan, despread(levels, code))
        errors += hamming_distance(decoded, msg)

    bits_sent = cfg.bits_per_frame()
    logger.debug(
        "Frame %s @ %g dB: %d/%d errors, %d blocks, pad_chips=%d pad_symbols=%d ofdm=%d",
        plan.scheme.name,
        snr_db,
        errors,
        bits_sent,
        n_blocks,
        meta.pad_chips,
        meta.pad_symbols,
        meta.ofdm_symbols,
    )
    return FrameResult(bit_errors=errors, bits_sent=bits_sent, redraws=redraws, meta=meta)
