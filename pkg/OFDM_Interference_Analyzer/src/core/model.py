"""
Transceiver and channel matrices for CP-OFDM and ZP-OFDM-OLA
=============================================================

Core data types and the exact construction of every matrix the interference
analysis is built from:

- the normalized DFT matrix W_N,
- the redundancy matrices Gamma (N0 x N, transmitter) and Upsilon (N x N0, receiver),
- the channel blocks H_(-m), m = -1, 0, ..., M, cut from the linear convolution of the
  FIR channel h_0..h_nu with the transmitted stream, seen through a receiver frame that
  starts Delta samples into the block.

Matrices are plain dense complex128 numpy arrays, returned read-only.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple
import math

import numpy as np

from .exceptions import ChannelError, InvalidConfigurationError


class Scheme(str, Enum):
    """Redundancy scheme"""

    CP = "CP"
    ZP_OLA = "ZP_OLA"


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class OFDMConfig:
    """Block size N, redundancy mu, scheme and synchronization delay Delta"""

    n_subcarriers: int
    redundancy: int = 0
    scheme: Scheme = Scheme.CP
    sync_delay: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.n_subcarriers < 1:
            raise InvalidConfigurationError(
                f"n_subcarriers must be positive, got {self.n_subcarriers}"
            )
        if not 0 <= self.redundancy < self.n_subcarriers:
            raise InvalidConfigurationError(
                f"redundancy must satisfy 0 <= mu < N={self.n_subcarriers}, got {self.redundancy}"
            )
        if not 0 <= self.sync_delay < self.block_length:
            raise InvalidConfigurationError(
                f"sync_delay must lie in [0, {self.block_length - 1}], got {self.sync_delay}"
            )

    @property
    def block_length(self) -> int:
        """N0 = N + mu"""
        return self.n_subcarriers + self.redundancy

    @property
    def efficiency(self) -> float:
        return self.n_subcarriers / self.block_length

    def with_changes(self, **changes) -> "OFDMConfig":
        values = {
            "n_subcarriers": self.n_subcarriers,
            "redundancy": self.redundancy,
            "scheme": self.scheme,
            "sync_delay": self.sync_delay,
        }
        values.update(changes)
        return OFDMConfig(**values)


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """FIR taps h_0..h_nu plus the sampling rate they were taken at"""

    taps: np.ndarray
    sampling_rate_hz: float = 2.208e6

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.complex128).ravel()
        if taps.size == 0:
            raise ChannelError("channel needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ChannelError("channel taps must be finite")
        if not np.any(taps != 0):
            raise ChannelError("channel taps are all zero")
        if not self.sampling_rate_hz > 0:
            raise ChannelError(f"sampling rate must be positive, got {self.sampling_rate_hz}")
        object.__setattr__(self, "taps", _frozen(taps))

    @property
    def order(self) -> int:
        """nu"""
        return self.taps.size - 1

    @property
    def energy(self) -> float:
        return float(np.vdot(self.taps, self.taps).real)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.taps.imag == 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChannelModel):
            return NotImplemented
        return (
            self.sampling_rate_hz == other.sampling_rate_hz
            and np.array_equal(self.taps, other.taps)
        )

    __hash__ = None


def block_span(order: int, block_length: int) -> Tuple[int, int]:
    """
    Return (M, rho) for a channel of order nu and blocks of length N0.

    M = ceil(nu / N0) and nu = (M - 1) N0 + rho + 1 with 0 <= rho < N0. A single-tap
    channel has M = 0 and rho = -1.
    """
    if order == 0:
        return 0, -1
    m_span = -(-order // block_length)
    rho = order - (m_span - 1) * block_length - 1
    return m_span, rho


@dataclass(frozen=True, eq=False)
class ChannelBlockSet:
    """The channel blocks H_(-m) for m = -1, 0, ..., M"""

    blocks: Tuple[np.ndarray, ...]
    m_span: int
    rho: int
    sync_delay: int = 0
    _index: Dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {m: m + 1 for m in self.indices})

    @property
    def indices(self) -> range:
        return range(-1, self.m_span + 1)

    def block(self, m: int) -> np.ndarray:
        """H_(-m), the block multiplying the data vector sent at time l - m"""
        try:
            return self.blocks[self._index[m]]
        except KeyError:
            raise KeyError(f"block index m={m} outside [-1, {self.m_span}]") from None

    def items(self):
        return ((m, self.block(m)) for m in self.indices)

    def nonzero_count(self) -> int:
        return sum(1 for block in self.blocks if np.any(block != 0))

    def predicted_nonzero_count(self) -> int:
        """
        Upper bound on the number of data vectors that reach one received frame.

        M + 2 when 1 <= Delta <= rho, otherwise M + 1. It is exact when every tap is
        nonzero. A single-tap channel reaches two frames only when Delta >= 1.
        """
        if self.m_span == 0:
            return 2 if self.sync_delay >= 1 else 1
        if 1 <= self.sync_delay <= self.rho:
            return self.m_span + 2
        return self.m_span + 1

    def frobenius_energy(self) -> float:
        return float(sum(np.vdot(block, block).real for block in self.blocks))


def dft_matrix(n: int) -> np.ndarray:
    """Normalized n x n DFT matrix, [W]_{k,n'} = exp(-j 2 pi k n' / n) / sqrt(n)"""
    if n < 1:
        raise InvalidConfigurationError(f"DFT size must be positive, got {n}")
    k = np.arange(n)
    # reduce k*n' mod n first so the phase argument stays small
    phase = np.outer(k, k) % n
    return _frozen(np.exp(-2j * np.pi * phase / n) / math.sqrt(n))


def redundancy_matrices(cfg: OFDMConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Return (Gamma, Upsilon) for the configured scheme"""
    n, mu = cfg.n_subcarriers, cfg.redundancy
    identity = np.eye(n, dtype=np.complex128)

    if cfg.scheme is Scheme.CP:
        gamma = np.vstack([identity[n - mu:, :], identity])
        upsilon = np.hstack([np.zeros((n, mu), dtype=np.complex128), identity])
    else:
        gamma = np.vstack([identity, np.zeros((mu, n), dtype=np.complex128)])
        fold = np.vstack([
            np.eye(mu, dtype=np.complex128),
            np.zeros((n - mu, mu), dtype=np.complex128),
        ])
        upsilon = np.hstack([identity, fold])

    return _frozen(gamma), _frozen(upsilon)


def transmit_matrix(cfg: OFDMConfig) -> np.ndarray:
    """T = Gamma . W_N^H"""
    gamma, _ = redundancy_matrices(cfg)
    return _frozen(gamma @ dft_matrix(cfg.n_subcarriers).conj().T)


def receive_front(cfg: OFDMConfig) -> np.ndarray:
    """W_N . Upsilon, the receiver without its diagonal equalizer"""
    _, upsilon = redundancy_matrices(cfg)
    return _frozen(dft_matrix(cfg.n_subcarriers) @ upsilon)


def channel_blocks(cfg: OFDMConfig, ch: ChannelModel) -> ChannelBlockSet:
    """
    Cut the channel blocks H_(-m) out of the stream convolution.

    Entry (b, c) of block m is h_{m N0 + b - c + Delta} when that index lies in
    [0, nu] and zero otherwise.
    """
    n0 = cfg.block_length
    m_span, rho = block_span(ch.order, n0)
    lag = np.arange(n0)[:, None] - np.arange(n0)[None, :] + cfg.sync_delay

    blocks = []
    for m in range(-1, m_span + 1):
        index = m * n0 + lag
        inside = (index >= 0) & (index <= ch.order)
        block = np.zeros((n0, n0), dtype=np.complex128)
        block[inside] = ch.taps[index[inside]]
        blocks.append(_frozen(block))

    return ChannelBlockSet(
        blocks=tuple(blocks), m_span=m_span, rho=rho, sync_delay=cfg.sync_delay
    )
