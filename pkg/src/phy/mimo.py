"""Alamouti space-time coding and linear/ML detection for 2 x Nr links.

All functions broadcast over leading axes, so a stack of B blocks is
handled in one call: channels are (..., Nr, 2), received blocks are
(..., Nr, 2) with columns as time slots.

Example:
    >>> import numpy as np
    >>> from src.phy.mimo import alamouti_encode, effective_channel, stack_received, zf_detect
    >>> rng = np.random.default_rng(1)
    >>> h = (rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))) / np.sqrt(2)
    >>> block = alamouti_encode(1 + 1j, 1 - 1j)
    >>> y = h @ block.tx.T
    >>> s = zf_detect(stack_received(y), effective_channel(h) / np.sqrt(2))
    >>> np.allclose(s, [1 + 1j, 1 - 1j])
    True
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from src.phy.common import ComplexArray, RealArray, SingularChannelError
from src.phy.modem import ModulationScheme

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12

# Blocks evaluated together in the exhaustive ML search.
ML_CHUNK = 512


@dataclass(frozen=True, eq=False)
class AlamoutiBlock:
    """Two symbols and their 2x2 transmit matrix.

    Attributes:
        s1: First symbol(s).
        s2: Second symbol(s).
        tx: (..., 2, 2) array, rows = time slots, columns = antennas,
            scaled by 1/sqrt(2) so each slot carries unit total power.
    """

    s1: ComplexArray
    s2: ComplexArray
    tx: ComplexArray

    @classmethod
    def from_tx(cls, tx: npt.ArrayLike) -> AlamoutiBlock:
        """Rebuild a block from its transmit matrix (slot 1 carries s1, s2)."""
        arr = np.asarray(tx, dtype=np.complex128)
        return cls(s1=arr[..., 0, 0] * np.sqrt(2), s2=arr[..., 0, 1] * np.sqrt(2), tx=arr)


def alamouti_encode(s1: npt.ArrayLike, s2: npt.ArrayLike) -> AlamoutiBlock:
    """Slot 1 sends (s1, s2), slot 2 sends (-s2*, s1*), both over sqrt(2)."""
    a = np.asarray(s1, dtype=np.complex128)
    b = np.asarray(s2, dtype=np.complex128)
    a, b = np.broadcast_arrays(a, b)
    tx = np.empty(a.shape + (2, 2), dtype=np.complex128)
    tx[..., 0, 0] = a
    tx[..., 0, 1] = b
    tx[..., 1, 0] = -np.conj(b)
    tx[..., 1, 1] = np.conj(a)
    return AlamoutiBlock(s1=a, s2=b, tx=tx / np.sqrt(2))


def alamouti_pair(symbols: npt.ArrayLike) -> AlamoutiBlock:
    """Pair consecutive symbols (s[2b], s[2b+1]); an odd tail is padded with 0."""
    x = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    if x.size % 2:
        x = np.concatenate([x, np.zeros(1, dtype=np.complex128)])
    return alamouti_encode(x[0::2], x[1::2])


def effective_channel(h: npt.ArrayLike) -> ComplexArray:
    """Stack the two slot equations into an equivalent (..., 2Nr, 2) channel.

    Row j is (h_1j, h_2j); row Nr + j is (h_2j*, -h_1j*), which turns the
    conjugated slot-2 observation into a linear function of (s1, s2).
    """
    arr = np.asarray(h, dtype=np.complex128)
    lower = np.stack([np.conj(arr[..., 1]), -np.conj(arr[..., 0])], axis=-1)
    return np.concatenate([arr, lower], axis=-2)


def stack_received(y: npt.ArrayLike) -> ComplexArray:
    """(..., Nr, 2) slot observations -> (..., 2Nr) vector [y_slot1; conj(y_slot2)]."""
    arr = np.asarray(y, dtype=np.complex128)
    return np.concatenate([arr[..., 0], np.conj(arr[..., 1])], axis=-1)


def _check_condition(gram: npt.NDArray[np.generic]) -> None:
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(gram)
    bad = ~np.isfinite(cond) | (cond > MAX_CONDITION)
    if np.any(bad):
        flat = np.flatnonzero(np.atleast_1d(bad))
        worst = float(np.nan_to_num(np.atleast_1d(cond)[flat], nan=np.inf).max())
        raise SingularChannelError(flat.tolist(), worst)


def zf_weights(h: npt.ArrayLike) -> ComplexArray:
    """Zero-forcing weights W = (H^H H)^-1 H^H.

    Raises:
        SingularChannelError: cond(H^H H) exceeds 1e12 (or is not finite).
    """
    arr = np.asarray(h, dtype=np.complex128)
    hh = np.conj(np.swapaxes(arr, -1, -2))
    gram = hh @ arr
    _check_condition(gram)
    return np.linalg.solve(gram, hh)


def zf_detect(y: npt.ArrayLike, h_eff: npt.ArrayLike) -> ComplexArray:
    """Linear estimate W_ZF y for stacked observations (..., 2Nr)."""
    w = zf_weights(h_eff)
    vec = np.asarray(y, dtype=np.complex128)
    return (w @ vec[..., np.newaxis])[..., 0]


def real_decompose(h: npt.ArrayLike, y: npt.ArrayLike) -> tuple[RealArray, RealArray]:
    """Real-valued model [[Re H, -Im H], [Im H, Re H]] and [Re y; Im y]."""
    arr = np.asarray(h, dtype=np.complex128)
    vec = np.asarray(y, dtype=np.complex128)
    top = np.concatenate([arr.real, -arr.imag], axis=-1)
    bottom = np.concatenate([arr.imag, arr.real], axis=-1)
    return np.concatenate([top, bottom], axis=-2), np.concatenate([vec.real, vec.imag], axis=-1)


def real_ls_detect(h_real: npt.ArrayLike, y_real: npt.ArrayLike) -> ComplexArray:
    """Least-squares solution of the real model, recombined as complex symbols.

    Solves (H^T H) a = H^T y for a = [Re s; Im s].

    Raises:
        SingularChannelError: The normal matrix is ill-conditioned.
    """
    hr = np.asarray(h_real, dtype=np.float64)
    yr = np.asarray(y_real, dtype=np.float64)
    ht = np.swapaxes(hr, -1, -2)
    gram = ht @ hr
    _check_condition(gram)
    a = np.linalg.solve(gram, (ht @ yr[..., np.newaxis]))[..., 0]
    n = a.shape[-1] // 2
    return a[..., :n] + 1j * a[..., n:]


def ml_detect(y: npt.ArrayLike, h_eff: npt.ArrayLike, scheme: ModulationScheme) -> ComplexArray:
    """Exhaustive ML search over all constellation pairs.

    Minimises ||y - H s||^2 = s^H G s - 2 Re(z^H s) + ||y||^2 with G = H^H H
    and z = H^H y, evaluated for every (s1, s2) hypothesis. Points are in
    label order, so argmin ties resolve to the smallest label pair.

    Args:
        y: Stacked observations (..., 2Nr).
        h_eff: Effective channel (..., 2Nr, 2).
        scheme: Constellation of both symbols.

    Returns:
        (..., 2) decided constellation points.
    """
    hm = np.asarray(h_eff, dtype=np.complex128)
    vec = np.asarray(y, dtype=np.complex128)
    lead = np.broadcast_shapes(hm.shape[:-2], vec.shape[:-1])
    hm = np.broadcast_to(hm, lead + hm.shape[-2:]).reshape(-1, *hm.shape[-2:])
    vec = np.broadcast_to(vec, lead + vec.shape[-1:]).reshape(-1, vec.shape[-1])

    points = scheme.points
    energy = np.abs(points) ** 2
    m = points.size
    decided = np.empty((hm.shape[0], 2), dtype=np.complex128)
    for start in range(0, hm.shape[0], ML_CHUNK):
        hc = hm[start : start + ML_CHUNK]
        yc = vec[start : start + ML_CHUNK]
        hh = np.conj(np.swapaxes(hc, -1, -2))
        gram = hh @ hc
        z = (hh @ yc[..., np.newaxis])[..., 0]
        g00 = gram[:, 0, 0].real[:, None, None]
        g11 = gram[:, 1, 1].real[:, None, None]
        g01 = gram[:, 0, 1][:, None, None]
        cross = np.conj(points)[None, :, None] * points[None, None, :]
        metric = (
            g00 * energy[None, :, None]
            + g11 * energy[None, None, :]
            + 2.0 * np.real(g01 * cross)
            - 2.0 * np.real(np.conj(z[:, 0])[:, None, None] * points[None, :, None])
            - 2.0 * np.real(np.conj(z[:, 1])[:, None, None] * points[None, None, :])
        )
        best = np.argmin(metric.reshape(metric.shape[0], m * m), axis=1)
        decided[start : start + hc.shape[0], 0] = points[best // m]
        decided[start : start + hc.shape[0], 1] = points[best % m]
    return decided.reshape(lead + (2,))
