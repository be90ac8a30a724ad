"""
SNR gap, per-tone capacity and aggregate achievable rate.

    Gamma_m = (1/3) [Q^{-1}(SER/4)]^2
    Gamma   = gamma_dm - gamma_c + Gamma_m            (dB)
    C(k)    = log2(1 + SINR(k) / Gamma)
    R       = f_s * N / N0 * sum_{k in active tones} C(k)
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import special

from .analysis import InterferenceReport
from .exceptions import InvalidConfigurationError
from .model import OFDMConfig


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(value, dtype=float))


def psd_dbm_hz_to_variance(psd_dbm_hz: float, sampling_rate_hz: float) -> float:
    """Per-sample variance of a flat PSD given in dBm/Hz over a band of f_s"""
    return float(10.0 ** ((psd_dbm_hz - 30.0) / 10.0) * sampling_rate_hz)


def q_function(x):
    """Tail probability of the standard normal distribution"""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def q_inverse(p):
    """Inverse of q_function on (0, 1)"""
    return -special.ndtri(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class RateParams:
    """Target SER, margins, coding gain, sampling rate and the active tone set"""

    ser_target: float = 1e-7
    design_margin_db: float = 6.0
    coding_gain_db: float = 4.2
    sampling_rate_hz: float = 2.208e6
    active_tones: Tuple[int, ...] = tuple(range(7, 257))

    def __post_init__(self):
        tones = tuple(int(t) for t in self.active_tones)
        if not tones:
            raise InvalidConfigurationError("active_tones must not be empty")
        if min(tones) < 0:
            raise InvalidConfigurationError("active tone indices must be nonnegative")
        if len(set(tones)) != len(tones):
            raise InvalidConfigurationError("active tone indices must be distinct")
        if not 0 < self.ser_target < 1:
            raise InvalidConfigurationError(f"SER target must lie in (0, 1), got {self.ser_target}")
        if not self.sampling_rate_hz > 0:
            raise InvalidConfigurationError("sampling rate must be positive")
        object.__setattr__(self, "active_tones", tuple(sorted(tones)))

    def check_tones(self, n_subcarriers: int):
        if max(self.active_tones) >= n_subcarriers:
            raise InvalidConfigurationError(
                f"active tone {max(self.active_tones)} outside 0..{n_subcarriers - 1}"
            )


def gamma_m(ser: float) -> float:
    """Uncoded QAM SNR gap (linear) for a target symbol error rate"""
    if not 0 < ser < 1:
        raise InvalidConfigurationError(f"SER must lie in (0, 1), got {ser}")
    return float(q_inverse(ser / 4.0) ** 2 / 3.0)


def snr_gap(p: RateParams) -> float:
    """Overall gap (linear): design margin minus coding gain plus Gamma_m, added in dB"""
    gap_db = p.design_margin_db - p.coding_gain_db + float(linear_to_db(gamma_m(p.ser_target)))
    return float(db_to_linear(gap_db))


def tone_capacity(sinr_k: float, gap: float) -> float:
    """Bits per symbol on one tone"""
    return float(tone_capacities(np.asarray([sinr_k]), gap)[0])


def tone_capacities(sinr: Sequence[float], gap: float) -> np.ndarray:
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0):
        raise InvalidConfigurationError("SINR values must be nonnegative")
    if not gap > 0:
        raise InvalidConfigurationError(f"SNR gap must be positive, got {gap}")
    return np.log2(1.0 + sinr / gap)


def rate_from_sinr(sinr: Sequence[float], cfg: OFDMConfig, p: RateParams) -> float:
    """Aggregate rate in bit/s from a per-tone SINR vector of length N"""
    sinr = np.asarray(sinr, dtype=float)
    if sinr.size != cfg.n_subcarriers:
        raise InvalidConfigurationError(
            f"got {sinr.size} SINR values but N={cfg.n_subcarriers}"
        )
    p.check_tones(cfg.n_subcarriers)
    bits = tone_capacities(sinr[np.asarray(p.active_tones)], snr_gap(p))
    return float(p.sampling_rate_hz * cfg.efficiency * np.sum(bits))


def achievable_rate(report: InterferenceReport, cfg: OFDMConfig, p: RateParams) -> float:
    """Aggregate rate in bit/s over the active tones"""
    return rate_from_sinr(report.sinr, cfg, p)
