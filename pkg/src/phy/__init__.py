"""Physical-layer building blocks of the MIMO-MC-CDMA link."""

from src.phy.channel import NoiseSpec, apply_awgn, draw_channel, transmit
from src.phy.common import (
    DegenerateStateError,
    EmptyInputError,
    OracleTooLargeError,
    PhyError,
    RaggedBlockError,
    SingularChannelError,
    UnpairedBitsError,
)
from src.phy.fec import ConvCode, conv_encode, ml_decode_oracle, viterbi_decode
from src.phy.mimo import (
    AlamoutiBlock,
    alamouti_encode,
    effective_channel,
    ml_detect,
    real_decompose,
    real_ls_detect,
    zf_detect,
    zf_weights,
)
from src.phy.modem import ModulationScheme, SymbolBlock, demap_hard, get_scheme, map_bits
from src.phy.ofdm import OfdmGrid, add_cp, dft, idft, ofdm_demodulate, ofdm_modulate, remove_cp
from src.phy.spread import SpreadingCode, despread, pn_generate, spread, walsh_generate

__all__ = [
    "AlamoutiBlock",
    "ConvCode",
    "DegenerateStateError",
    "EmptyInputError",
    "ModulationScheme",
    "NoiseSpec",
    "OfdmGrid",
    "OracleTooLargeError",
    "PhyError",
    "RaggedBlockError",
    "SingularChannelError",
    "SpreadingCode",
    "SymbolBlock",
    "UnpairedBitsError",
    "add_cp",
    "alamouti_encode",
    "apply_awgn",
    "conv_encode",
    "demap_hard",
    "despread",
    "dft",
    "draw_channel",
    "effective_channel",
    "get_scheme",
    "idft",
    "map_bits",
    "ml_decode_oracle",
    "ml_detect",
    "ofdm_demodulate",
    "ofdm_modulate",
    "pn_generate",
    "real_decompose",
    "real_ls_detect",
    "remove_cp",
    "spread",
    "transmit",
    "viterbi_decode",
    "walsh_generate",
    "zf_detect",
    "zf_weights",
]
