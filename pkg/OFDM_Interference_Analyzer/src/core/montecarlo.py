"""
Time-domain Monte Carlo oracle
==============================

Transmits a long stream of OFDM blocks through the FIR channel, adds circular white
Gaussian noise, cuts the receiver frames at offset Delta and measures, per tone, the
desired gain, the residual interference-plus-noise power and the resulting SINR. It
never touches the analytic operators, so it can be used to check them.

Frame convention: the frame of block l is y[l N0 + Delta : l N0 + Delta + N0]. Sample
b of that frame is sum_j h_j x[l N0 + Delta + b - j]; with x[(l - m) N0 + c] being sample
c of block l - m this gives j = m N0 + b - c + Delta, the index rule of the channel
blocks.

Randomness: symbols of logical block l come from a Philox substream keyed by
(seed, symbols, l // batch_size) and noise from a disjoint (seed, noise, ...) key, so
results do not depend on batching or thread count, and switching noise off leaves the
symbol draw untouched. Blocks outside the transmitted stream are silent.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Tuple
import logging
import math

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import signal

from .analysis import SignalStats
from .equalizer import EqualizerKind, make_equalizer, reference_diagonal
from .exceptions import SimulationError
from .model import ChannelModel, OFDMConfig, block_span, receive_front, transmit_matrix

logger = logging.getLogger(__name__)

MIN_BLOCKS = 1000

_SYMBOL_STREAM = 0
_NOISE_STREAM = 1


class ConstellationLabel(str, Enum):
    QPSK = "QPSK"
    QAM16 = "QAM16"
    QAM64 = "QAM64"


_QAM_ORDER = {
    ConstellationLabel.QPSK: 4,
    ConstellationLabel.QAM16: 16,
    ConstellationLabel.QAM64: 64,
}


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square QAM alphabet normalized to unit average power"""

    points: np.ndarray
    label: ConstellationLabel

    @classmethod
    def square_qam(cls, label) -> "Constellation":
        label = ConstellationLabel(label)
        side = math.isqrt(_QAM_ORDER[label])
        levels = np.arange(-(side - 1), side, 2, dtype=float)
        points = (levels[:, None] + 1j * levels[None, :]).ravel()
        points = points / np.sqrt(np.mean(np.abs(points) ** 2))
        points.setflags(write=False)
        return cls(points=points, label=label)


@dataclass(frozen=True)
class SimConfig:
    n_blocks: int = 200_000
    seed: int = 0
    warmup_blocks: Optional[int] = None
    stats: SignalStats = field(default_factory=SignalStats)
    constellation: Constellation = field(
        default_factory=lambda: Constellation.square_qam(ConstellationLabel.QPSK)
    )
    equalizer: Optional[EqualizerKind] = None
    batch_size: int = 4096
    threads: int = 1

    def __post_init__(self):
        if self.n_blocks < 1:
            raise SimulationError(f"n_blocks must be positive, got {self.n_blocks}")
        if self.warmup_blocks is not None and self.warmup_blocks < 0:
            raise SimulationError("warmup_blocks must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise SimulationError("seed must be an unsigned 64-bit integer")
        if self.batch_size < 1 or self.threads < 1:
            raise SimulationError("batch_size and threads must be positive")
        if self.equalizer is not None:
            object.__setattr__(self, "equalizer", EqualizerKind(self.equalizer))


@dataclass(frozen=True, eq=False)
class SimResult:
    p_signal: np.ndarray
    p_interference_plus_noise: np.ndarray
    sinr: np.ndarray
    b_des_hat: np.ndarray
    n_blocks_used: int
    mse: Optional[np.ndarray] = None

    @property
    def sinr_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.sinr)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            "tone": np.arange(self.sinr.size),
            "mc_p_signal": self.p_signal,
            "mc_p_interference_plus_noise": self.p_interference_plus_noise,
            "mc_sinr_db": self.sinr_db,
        })
        if self.mse is not None:
            frame["mc_mse"] = self.mse
        return frame


def _generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(sequence))


class _Stream:
    """Deterministic symbol and noise source indexed by logical block number"""

    def __init__(self, cfg: OFDMConfig, sim: SimConfig, total_blocks: int):
        self.n = cfg.n_subcarriers
        self.n0 = cfg.block_length
        self.sim = sim
        self.total_blocks = total_blocks
        self.amplitude = math.sqrt(sim.stats.sigma2_x)
        self.noise_scale = math.sqrt(sim.stats.sigma2_q / 2.0)

    def _assemble(self, first: int, stop: int, width: int, draw: Callable, dtype) -> np.ndarray:
        size = self.sim.batch_size
        out = np.zeros((stop - first, width), dtype=dtype)
        lo, hi = max(first, 0), min(stop, self.total_blocks)
        if lo >= hi:
            return out
        for chunk in range(lo // size, (hi - 1) // size + 1):
            base = chunk * size
            rows = draw(chunk)
            a, b = max(lo, base), min(hi, base + size)
            out[a - first:b - first] = rows[a - base:b - base]
        return out

    def symbols(self, first: int, stop: int) -> np.ndarray:
        points = self.sim.constellation.points

        def draw(chunk):
            generator = _generator(self.sim.seed, _SYMBOL_STREAM, chunk)
            index = generator.integers(0, points.size, size=(self.sim.batch_size, self.n))
            return self.amplitude * points[index]

        return self._assemble(first, stop, self.n, draw, np.complex128)

    def noise(self, first: int, stop: int) -> np.ndarray:
        def draw(chunk):
            generator = _generator(self.sim.seed, _NOISE_STREAM, chunk)
            parts = generator.standard_normal((self.sim.batch_size, self.n0, 2))
            return self.noise_scale * (parts[..., 0] + 1j * parts[..., 1])

        return self._assemble(first, stop, self.n0, draw, np.complex128)


def _receive(
    stream: _Stream,
    cfg: OFDMConfig,
    ch: ChannelModel,
    m_span: int,
    transmit: np.ndarray,
    front: np.ndarray,
    start: int,
    stop: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Pre-equalizer DFT outputs Y and sent symbols X for measured blocks [start, stop)"""
    n0 = cfg.block_length
    first = start - (m_span + 1)
    last = stop + 1

    symbols = stream.symbols(first, last)
    x = (symbols @ transmit.T).ravel()
    y = signal.oaconvolve(x, ch.taps)[: x.size]

    offset = (start - first) * n0 + cfg.sync_delay
    frames = y[offset: offset + (stop - start) * n0].reshape(stop - start, n0)
    if stream.sim.stats.sigma2_q > 0:
        frames = frames + stream.noise(start, stop)

    return frames @ front.T, symbols[start - first: stop - first]


def _compensated_sum(partials: List[np.ndarray]) -> np.ndarray:
    stacked = np.asarray(partials)
    if np.iscomplexobj(stacked):
        return _compensated_sum(list(stacked.real)) + 1j * _compensated_sum(list(stacked.imag))
    return np.array([math.fsum(column) for column in stacked.T])


def simulate_stream(cfg: OFDMConfig, ch: ChannelModel, sim: SimConfig) -> SimResult:
    """Empirical per-tone desired gain, interference-plus-noise power and SINR"""
    if sim.n_blocks < MIN_BLOCKS:
        raise SimulationError(
            f"power estimation needs at least {MIN_BLOCKS} blocks, got {sim.n_blocks}"
        )
    m_span, _ = block_span(ch.order, cfg.block_length)
    warmup = m_span + 2 if sim.warmup_blocks is None else sim.warmup_blocks
    if warmup >= sim.n_blocks:
        raise SimulationError(
            f"channel spans {m_span} extra blocks; warmup of {warmup} blocks "
            f"leaves nothing of {sim.n_blocks} to measure"
        )

    stream = _Stream(cfg, sim, total_blocks=sim.n_blocks + 2 * warmup)
    transmit = np.asarray(transmit_matrix(cfg))
    front = np.asarray(receive_front(cfg))
    batches = [
        (start, min(start + sim.batch_size, warmup + sim.n_blocks))
        for start in range(warmup, warmup + sim.n_blocks, sim.batch_size)
    ]
    sigma2_x = sim.stats.sigma2_x

    logger.info(
        "🎲 Simulating %d blocks (N=%d, mu=%d, %s, Delta=%d, nu=%d) in %d batches",
        sim.n_blocks, cfg.n_subcarriers, cfg.redundancy, cfg.scheme.value,
        cfg.sync_delay, ch.order, len(batches),
    )

    def correlate(batch):
        y, x = _receive(stream, cfg, ch, m_span, transmit, front, *batch)
        return np.sum(y * x.conj(), axis=0), np.sum(x.real ** 2 + x.imag ** 2, axis=0)

    def residual(batch, b_hat, coeffs):
        y, x = _receive(stream, cfg, ch, m_span, transmit, front, *batch)
        error = y - b_hat * x
        power = np.sum(error.real ** 2 + error.imag ** 2, axis=0)
        if coeffs is None:
            return power, None
        miss = coeffs * y - x
        return power, np.sum(miss.real ** 2 + miss.imag ** 2, axis=0)

    with Parallel(n_jobs=sim.threads, prefer="threads") as parallel:
        moments = parallel(delayed(correlate)(batch) for batch in batches)
        b_hat = (
            _compensated_sum([cross for cross, _ in moments])
            / _compensated_sum([power for _, power in moments])
        )

        coeffs = None
        if sim.equalizer is not None:
            coeffs = make_equalizer(
                sim.equalizer, reference_diagonal(cfg, ch), snr=sim.stats.snr
            ).coeffs

        partials = parallel(delayed(residual)(batch, b_hat, coeffs) for batch in batches)

    p_in = _compensated_sum([power for power, _ in partials]) / sim.n_blocks
    mse = None
    if coeffs is not None:
        mse = _compensated_sum([miss for _, miss in partials]) / sim.n_blocks

    p_signal = sigma2_x * np.abs(b_hat) ** 2
    sinr = np.zeros_like(p_signal)
    positive = p_in > 0
    sinr[positive] = p_signal[positive] / p_in[positive]
    sinr[~positive & (p_signal > 0)] = np.inf

    return SimResult(
        p_signal=p_signal,
        p_interference_plus_noise=p_in,
        sinr=sinr,
        b_des_hat=b_hat,
        n_blocks_used=sim.n_blocks,
        mse=mse,
    )
