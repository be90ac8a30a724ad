"""
Synthetic long-tail channels and CIR truncation.

The generators stand in for measured subscriber-loop responses: an exponentially
decaying complex Gaussian response, a two-ray echo, and an exponential response whose
energy beyond a split index is rescaled to a chosen fraction of the total.
"""

from typing import NamedTuple
import logging

import numpy as np

from ..config.settings import settings
from ..core.exceptions import ChannelError
from ..core.model import ChannelModel

logger = logging.getLogger(__name__)


class TruncatedChannel(NamedTuple):
    channel: ChannelModel
    discarded_fraction: float


def tail_energy_fraction(ch: ChannelModel, index: int) -> float:
    """Share of ||h||^2 carried by taps at positions >= index"""
    power = np.abs(ch.taps) ** 2
    return float(np.sum(power[index:]) / np.sum(power))


def truncate_cir(ch: ChannelModel, max_len: int) -> TruncatedChannel:
    """Keep the first max_len taps and report the discarded energy fraction"""
    if max_len < 1:
        raise ChannelError(f"max_len must be positive, got {max_len}")
    if max_len >= ch.taps.size:
        return TruncatedChannel(ch, 0.0)

    kept = ChannelModel(taps=ch.taps[:max_len], sampling_rate_hz=ch.sampling_rate_hz)
    discarded = min(max(1.0 - kept.energy / ch.energy, 0.0), 1.0)
    logger.debug("truncated nu=%d to %d taps, %.4f of energy discarded", ch.order, max_len, discarded)
    return TruncatedChannel(kept, discarded)


def synth_exponential(
    nu: int,
    decay_rate: float,
    seed: int,
    sampling_rate_hz: float = settings.SAMPLING_RATE_HZ,
) -> ChannelModel:
    """h_j = g_j exp(-decay_rate j), g_j unit-variance circular complex Gaussian"""
    if nu < 0:
        raise ChannelError(f"channel order must be nonnegative, got {nu}")
    if not decay_rate > 0:
        raise ChannelError(f"decay rate must be positive, got {decay_rate}")

    generator = np.random.default_rng(seed)
    gains = (generator.standard_normal(nu + 1) + 1j * generator.standard_normal(nu + 1)) / np.sqrt(2.0)
    taps = gains * np.exp(-decay_rate * np.arange(nu + 1))
    return ChannelModel(taps=taps, sampling_rate_hz=sampling_rate_hz)


def synth_two_ray(
    delay: int,
    gain: complex,
    sampling_rate_hz: float = settings.SAMPLING_RATE_HZ,
) -> ChannelModel:
    """Direct path of unit gain plus one echo of the given gain and delay"""
    if delay < 0:
        raise ChannelError(f"echo delay must be nonnegative, got {delay}")
    if abs(gain) > 1:
        raise ChannelError(f"echo gain magnitude must not exceed 1, got {abs(gain)}")

    taps = np.zeros(delay + 1, dtype=np.complex128)
    taps[0] = 1.0
    taps[delay] += gain
    return ChannelModel(taps=taps, sampling_rate_hz=sampling_rate_hz)


def synth_tail_matched(
    nu: int,
    split_index: int,
    tail_fraction: float,
    decay_rate: float,
    seed: int,
    sampling_rate_hz: float = settings.SAMPLING_RATE_HZ,
) -> ChannelModel:
    """Exponential channel whose taps at positions >= split_index hold tail_fraction of the energy"""
    if not 0 < split_index <= nu:
        raise ChannelError(f"split index must lie in [1, {nu}], got {split_index}")
    if not 0 <= tail_fraction < 1:
        raise ChannelError(f"tail fraction must lie in [0, 1), got {tail_fraction}")

    taps = synth_exponential(nu, decay_rate, seed, sampling_rate_hz).taps.copy()
    head = float(np.sum(np.abs(taps[:split_index]) ** 2))
    tail = float(np.sum(np.abs(taps[split_index:]) ** 2))
    # alpha^2 T / (H + alpha^2 T) = f
    taps[split_index:] *= np.sqrt(tail_fraction * head / ((1.0 - tail_fraction) * tail))
    return ChannelModel(taps=taps, sampling_rate_hz=sampling_rate_hz)
