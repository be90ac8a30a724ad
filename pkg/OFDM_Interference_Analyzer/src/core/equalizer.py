"""
One-tap frequency-domain equalizers.

With enough redundancy (nu <= mu, Delta = 0, CP) the channel collapses to the diagonal
D = diag(sqrt(N) W_N [h; 0]) and the usual ZF (D^-1) and MMSE
(D^H (D D^H + I/SNR)^-1) equalizers apply tone by tone.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analysis import interference_matrices
from .exceptions import ChannelError, EqualizerError
from .model import ChannelModel, OFDMConfig


class EqualizerKind(str, Enum):
    ZF = "ZF"
    MMSE = "MMSE"
    IDENTITY = "IDENTITY"


@dataclass(frozen=True, eq=False)
class DiagonalEqualizer:
    coeffs: np.ndarray
    kind: EqualizerKind

    def apply(self, y: np.ndarray) -> np.ndarray:
        """E Y for a single block (N,) or a stack of blocks (L, N)"""
        return np.asarray(y) * self.coeffs


def channel_diagonal(ch: ChannelModel, n: int) -> np.ndarray:
    """sqrt(n) W_n [h; 0], i.e. the unnormalized n-point DFT of the zero-padded taps"""
    if ch.order >= n:
        raise ChannelError(f"channel order {ch.order} does not fit a {n}-point DFT")
    return np.fft.fft(ch.taps, n)


def reference_diagonal(cfg: OFDMConfig, ch: ChannelModel) -> np.ndarray:
    """
    Diagonal used to build equalizers for a given link.

    The diagonal of B^{des,ICI1}, which is what a one-tap receiver sees on each tone.
    It equals D when the redundancy covers the channel and Delta = 0.
    """
    if cfg.sync_delay == 0 and ch.order <= cfg.redundancy:
        return channel_diagonal(ch, cfg.n_subcarriers)
    return np.diag(interference_matrices(cfg, ch).b_full).copy()


def make_equalizer(kind, d: np.ndarray, snr: float = np.inf) -> DiagonalEqualizer:
    """Per-tone ZF, MMSE or identity coefficients for the diagonal d"""
    kind = EqualizerKind(kind)
    d = np.asarray(d, dtype=np.complex128)

    if kind is EqualizerKind.IDENTITY:
        coeffs = np.ones_like(d)
    elif kind is EqualizerKind.ZF:
        nulls = np.flatnonzero(d == 0)
        if nulls.size:
            raise EqualizerError(
                f"zero-forcing equalizer undefined: spectral null on tone {nulls[0]}",
                tone=int(nulls[0]),
            )
        coeffs = 1.0 / d
    else:
        if not snr > 0:
            raise EqualizerError(f"MMSE equalizer needs a positive SNR, got {snr}")
        coeffs = d.conj() / (np.abs(d) ** 2 + 1.0 / snr)

    return DiagonalEqualizer(coeffs=coeffs, kind=kind)
