"""
Channel-shortening TEQ design and rate sweeps
=============================================

The TEQ w (T taps) is chosen to maximize the shortening SNR of the overall impulse
response c = h * w: the energy of c inside a window of window_len = mu + 1 samples
starting at the delay d, over the energy outside it. With C the (nu + T) x T
convolution matrix of h this is the generalized Rayleigh quotient

    w^H A w / w^H B w,   A = C_win^H C_win,   B = C_wall^H C_wall + eps I,

whose maximizer is the dominant generalized eigenvector (eps = 1e-12 tr(A + B) / T).

The sweep harness designs a TEQ for every point of a TEQ-length or CP-length grid and
every delay of a delay grid, scores the resulting overall response with the exact SINR
analysis and keeps the best delay. The receiver frame is aligned with the window, so the
analysis runs with Delta = d.

Two scoring modes are supported. Actual designs on and scores the full response.
Conventional designs on the first max_len taps and scores the overall response
truncated to max_len taps, i.e. the classic assumption that interference stops after
a couple of blocks.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import linalg

from ..channels.synthetic import truncate_cir
from ..config.settings import settings
from .analysis import SignalStats, analyze
from .exceptions import InvalidConfigurationError, TeqDesignError
from .model import ChannelModel, OFDMConfig
from .rate import RateParams, achievable_rate, db_to_linear

logger = logging.getLogger(__name__)

_REGULARIZATION = 1e-12
_DEGENERACY_TOLERANCE = 1e-8


class AnalysisMode(str, Enum):
    CONVENTIONAL = "Conventional"
    ACTUAL = "Actual"


class SweepKind(str, Enum):
    TEQ_LEN = "teq_len"
    CP_LEN = "cp_len"


@dataclass(frozen=True, eq=False)
class TeqDesign:
    taps: np.ndarray
    delay: int
    window_len: int
    shortening_snr_db: float

    @property
    def length(self) -> int:
        return self.taps.size


@dataclass(frozen=True)
class SweepSpec:
    """A TEQ-length or CP-length grid plus the delay grid searched at each point"""

    kind: SweepKind
    values: Tuple[int, ...]
    teq_len: int = settings.TEQ_LENGTH
    teq_len_grid: Optional[Tuple[int, ...]] = None
    delays: Tuple[int, ...] = settings.delay_grid()
    teq_len_up_to_cp: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", SweepKind(self.kind))
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "delays", tuple(int(d) for d in self.delays))
        if self.teq_len_grid is not None:
            object.__setattr__(self, "teq_len_grid", tuple(int(t) for t in self.teq_len_grid))
        if not self.values:
            raise InvalidConfigurationError("sweep grid must not be empty")
        if not self.delays or min(self.delays) < 0:
            raise InvalidConfigurationError("delay grid must be nonempty and nonnegative")


def _gram_matrices(
    ch: ChannelModel, teq_len: int, window_len: int, delay: int
) -> Tuple[np.ndarray, np.ndarray]:
    if teq_len < 1 or window_len < 1:
        raise TeqDesignError("TEQ length and window length must be positive")
    if delay < 0 or delay >= ch.order + teq_len:
        raise TeqDesignError(
            f"window start {delay} lies outside an overall response "
            f"of {ch.order + teq_len} samples"
        )

    taps = ch.taps.real if ch.is_real else ch.taps
    conv = linalg.convolution_matrix(taps, teq_len, mode="full")
    inside = np.zeros(conv.shape[0], dtype=bool)
    inside[delay:delay + window_len] = True

    window = conv[inside]
    wall = conv[~inside]
    a = window.conj().T @ window
    b = wall.conj().T @ wall
    eps = _REGULARIZATION * np.trace(a + b).real / teq_len
    return a, b + eps * np.eye(teq_len)


def _rayleigh_quotient(a: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    return float(np.vdot(w, a @ w).real / np.vdot(w, b @ w).real)


def shortening_ratio(ch: ChannelModel, taps: np.ndarray, window_len: int, delay: int) -> float:
    """In-window over wall energy of h * w (regularized denominator)"""
    taps = np.asarray(taps)
    a, b = _gram_matrices(ch, taps.size, window_len, delay)
    return _rayleigh_quotient(a, b, taps)


def _pick_from_eigenspace(basis: np.ndarray) -> np.ndarray:
    """Projection of the lowest-index unit vector that is not orthogonal to the subspace"""
    q = linalg.orth(basis)
    for j in range(q.shape[0]):
        candidate = q @ q[j].conj()
        if np.linalg.norm(candidate) > _DEGENERACY_TOLERANCE:
            return candidate
    return q[:, 0]


def design_mssnr(ch: ChannelModel, teq_len: int, window_len: int, delay: int) -> TeqDesign:
    """Unit-norm TEQ maximizing the shortening SNR for a window starting at delay"""
    a, b = _gram_matrices(ch, teq_len, window_len, delay)
    if not np.trace(a).real > 0:
        raise TeqDesignError(f"no response energy can reach the window at delay {delay}")
    try:
        values, vectors = linalg.eigh(a, b)
    except linalg.LinAlgError as exc:
        raise TeqDesignError(f"wall matrix is singular after regularization: {exc}") from exc

    top = values[-1]
    degenerate = values >= top - _DEGENERACY_TOLERANCE * abs(top)
    if np.count_nonzero(degenerate) == 1:
        w = vectors[:, -1]
    else:
        # the optimum is not unique; prefer the shortest-delay spike-like solution
        w = _pick_from_eigenspace(vectors[:, degenerate])

    w = w / np.linalg.norm(w)
    anchor = np.argmax(np.abs(w))
    w = w * (abs(w[anchor]) / w[anchor])
    if ch.is_real:
        w = w.real

    ratio = _rayleigh_quotient(a, b, w)
    if not (np.isfinite(ratio) and ratio > 0):
        raise TeqDesignError(f"shortening SNR is undefined at delay {delay}")
    snr_db = float(10.0 * np.log10(ratio))

    w.setflags(write=False)
    return TeqDesign(taps=w, delay=delay, window_len=window_len, shortening_snr_db=snr_db)


def overall_response(ch: ChannelModel, design: TeqDesign) -> ChannelModel:
    """OIR = h * w"""
    return ChannelModel(
        taps=np.convolve(ch.taps, design.taps),
        sampling_rate_hz=ch.sampling_rate_hz,
    )


def _apply_mode(ch: ChannelModel, mode: AnalysisMode, max_len: Optional[int]) -> ChannelModel:
    if mode is AnalysisMode.CONVENTIONAL:
        if max_len is None:
            raise InvalidConfigurationError("Conventional mode needs a truncation length")
        return truncate_cir(ch, max_len).channel
    return ch


def score_design(
    ch: ChannelModel,
    cfg: OFDMConfig,
    stats: SignalStats,
    rate_params: RateParams,
    design: TeqDesign,
    mode: AnalysisMode = AnalysisMode.ACTUAL,
    max_len: Optional[int] = None,
) -> float:
    """Achievable rate of the overall response, analysed with the frame aligned to the window"""
    mode = AnalysisMode(mode)
    oir = _apply_mode(overall_response(ch, design), mode, max_len)
    aligned = cfg.with_changes(sync_delay=design.delay)
    return achievable_rate(analyze(aligned, oir, stats), aligned, rate_params)


def evaluate_delays(
    ch: ChannelModel,
    cfg: OFDMConfig,
    stats: SignalStats,
    rate_params: RateParams,
    teq_len: int,
    delays: Sequence[int],
    mode: AnalysisMode = AnalysisMode.ACTUAL,
    max_len: Optional[int] = None,
) -> pd.DataFrame:
    """Design and score one TEQ per feasible delay"""
    mode = AnalysisMode(mode)
    design_ch = _apply_mode(ch, mode, max_len)
    window_len = cfg.redundancy + 1

    rows = []
    for delay in delays:
        if delay >= cfg.block_length or delay >= design_ch.order + teq_len:
            continue
        try:
            design = design_mssnr(design_ch, teq_len, window_len, delay)
        except TeqDesignError as exc:
            logger.debug("skipping delay %d: %s", delay, exc)
            continue
        rows.append({
            "delay": delay,
            "teq_len": teq_len,
            "rate_bps": score_design(ch, cfg, stats, rate_params, design, mode, max_len),
            "shortening_snr_db": design.shortening_snr_db,
        })

    if not rows:
        raise TeqDesignError(
            f"no feasible delay in the grid for T={teq_len}, window={window_len}, "
            f"nu={design_ch.order}"
        )
    return pd.DataFrame(rows, columns=["delay", "teq_len", "rate_bps", "shortening_snr_db"])


def _cp_point_teq_lens(sweep: SweepSpec, redundancy: int) -> Tuple[int, ...]:
    """TEQ lengths tried at one CP-length point"""
    if sweep.teq_len_up_to_cp:
        # lengths 2..mu, a single tap when mu < 2
        return tuple(range(2, redundancy + 1)) or (1,)
    return sweep.teq_len_grid or (sweep.teq_len,)


def _sweep_point(ch, cfg_base, stats, rate_params, sweep, mode, max_len, value) -> dict:
    if sweep.kind is SweepKind.TEQ_LEN:
        cfg = cfg_base.with_changes(sync_delay=0)
        teq_lens = (value,)
    else:
        cfg = cfg_base.with_changes(redundancy=value, sync_delay=0)
        teq_lens = _cp_point_teq_lens(sweep, value)

    table = pd.concat(
        [
            evaluate_delays(ch, cfg, stats, rate_params, t, sweep.delays, mode, max_len)
            for t in teq_lens
        ],
        ignore_index=True,
    )
    best = table.loc[table["rate_bps"].idxmax()]
    logger.info(
        "📈 %s %s=%d: best delay %d, %.6g bit/s",
        mode.value, sweep.kind.value, value, best["delay"], best["rate_bps"],
    )
    return {
        "mode": mode.value,
        "sweep": sweep.kind.value,
        "value": value,
        "redundancy": cfg.redundancy,
        "teq_len": int(best["teq_len"]),
        "delay": int(best["delay"]),
        "rate_bps": float(best["rate_bps"]),
        "shortening_snr_db": float(best["shortening_snr_db"]),
    }


def default_sweep_stats() -> SignalStats:
    return SignalStats(
        sigma2_x=1.0,
        sigma2_q=float(db_to_linear(settings.NOISE_PSD_DBM_HZ - settings.SIGNAL_PSD_DBM_HZ)),
    )


def sweep_rate(
    ch: ChannelModel,
    cfg_base: OFDMConfig,
    rate_params: RateParams,
    sweep: SweepSpec,
    mode: AnalysisMode = AnalysisMode.ACTUAL,
    max_len: Optional[int] = None,
    stats: Optional[SignalStats] = None,
    threads: int = 1,
) -> pd.DataFrame:
    """
    Best-delay achievable rate for every point of the sweep grid.

    Without explicit stats the signal is normalized to sigma_X^2 = 1 and the noise keeps
    the configured noise-to-signal PSD ratio.
    """
    mode = AnalysisMode(mode)
    if stats is None:
        stats = default_sweep_stats()
    rows = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_sweep_point)(ch, cfg_base, stats, rate_params, sweep, mode, max_len, value)
        for value in sweep.values
    )
    return pd.DataFrame(rows, columns=[
        "mode", "sweep", "value", "redundancy", "teq_len", "delay", "rate_bps",
        "shortening_snr_db",
    ])
