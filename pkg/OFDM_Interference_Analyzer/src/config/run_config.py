"""
Run-file schema.

A run file is a JSON document whose sections mirror the domain types. Every section
is optional and falls back to the defaults in settings; unknown keys are rejected.
The whole file is validated before anything is computed.
"""

from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    model_validator,
)

from ..core.analysis import SignalStats
from ..core.equalizer import EqualizerKind
from ..core.exceptions import OFDMAnalysisError
from ..core.model import OFDMConfig, Scheme
from ..core.montecarlo import MIN_BLOCKS, Constellation, SimConfig
from ..core.rate import RateParams, db_to_linear, psd_dbm_hz_to_variance
from ..core.teq import SweepSpec
from .settings import settings


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class OFDMSection(_Section):
    n_subcarriers: PositiveInt = settings.N_SUBCARRIERS
    redundancy: NonNegativeInt = settings.REDUNDANCY
    scheme: Scheme = Scheme(settings.SCHEME)
    sync_delay: NonNegativeInt = settings.SYNC_DELAY

    @model_validator(mode="after")
    def _check_invariants(self):
        try:
            self.to_domain()
        except OFDMAnalysisError as exc:
            raise ValueError(str(exc)) from None
        return self

    def to_domain(self) -> OFDMConfig:
        return OFDMConfig(
            n_subcarriers=self.n_subcarriers,
            redundancy=self.redundancy,
            scheme=self.scheme,
            sync_delay=self.sync_delay,
        )


class SignalSection(_Section):
    """
    Symbol and noise variances.

    Explicit variances win. Otherwise sigma_X^2 = 1 and sigma_Q^2 keeps the PSD ratio,
    unless absolute_levels asks for both PSDs converted to per-sample variances.
    """

    sigma2_x: Optional[PositiveFloat] = None
    sigma2_q: Optional[NonNegativeFloat] = None
    signal_psd_dbm_hz: float = settings.SIGNAL_PSD_DBM_HZ
    noise_psd_dbm_hz: float = settings.NOISE_PSD_DBM_HZ
    absolute_levels: bool = False

    def to_domain(self, sampling_rate_hz: float) -> SignalStats:
        if self.absolute_levels:
            level_x = psd_dbm_hz_to_variance(self.signal_psd_dbm_hz, sampling_rate_hz)
            level_q = psd_dbm_hz_to_variance(self.noise_psd_dbm_hz, sampling_rate_hz)
        else:
            level_x = 1.0
            level_q = float(db_to_linear(self.noise_psd_dbm_hz - self.signal_psd_dbm_hz))

        sigma2_x = self.sigma2_x if self.sigma2_x is not None else level_x
        if self.sigma2_q is not None:
            sigma2_q = self.sigma2_q
        else:
            sigma2_q = level_q * sigma2_x / level_x
        return SignalStats(sigma2_x=sigma2_x, sigma2_q=sigma2_q)


class RateSection(_Section):
    ser_target: float = Field(default=settings.SER_TARGET, gt=0, lt=1)
    design_margin_db: float = settings.DESIGN_MARGIN_DB
    coding_gain_db: float = settings.CODING_GAIN_DB
    sampling_rate_hz: Optional[PositiveFloat] = None
    active_tones: Optional[List[NonNegativeInt]] = Field(default=None, min_length=1)
    first_tone: NonNegativeInt = settings.FIRST_ACTIVE_TONE
    last_tone: NonNegativeInt = settings.LAST_ACTIVE_TONE

    def to_domain(self, n_subcarriers: int, sampling_rate_hz: float) -> RateParams:
        if self.active_tones is not None:
            tones = tuple(self.active_tones)
        else:
            # the default band is clipped to the tones that exist
            tones = tuple(range(self.first_tone, min(self.last_tone, n_subcarriers - 1) + 1))
        params = RateParams(
            ser_target=self.ser_target,
            design_margin_db=self.design_margin_db,
            coding_gain_db=self.coding_gain_db,
            sampling_rate_hz=self.sampling_rate_hz or sampling_rate_hz,
            active_tones=tones,
        )
        params.check_tones(n_subcarriers)
        return params


class SyntheticChannelSection(_Section):
    kind: Literal["exponential", "two_ray", "tail_matched"]
    nu: NonNegativeInt = 1500
    decay_rate: PositiveFloat = 0.005
    seed: NonNegativeInt = 7
    delay: NonNegativeInt = 700
    gain: float = Field(default=0.9, ge=-1, le=1)
    split_index: PositiveInt = 512
    tail_fraction: float = Field(default=0.2118, ge=0, lt=1)


class ChannelSection(_Section):
    cir_path: Optional[Path] = None
    synthetic: Optional[SyntheticChannelSection] = None
    truncate_to: Optional[PositiveInt] = None
    sampling_rate_hz: PositiveFloat = settings.SAMPLING_RATE_HZ

    @model_validator(mode="after")
    def _one_source(self):
        if self.cir_path is not None and self.synthetic is not None:
            raise ValueError("give either cir_path or synthetic, not both")
        return self


class SimulationSection(_Section):
    n_blocks: int = Field(default=settings.SIM_BLOCKS, ge=MIN_BLOCKS)
    seed: int = Field(default=settings.SIM_SEED, ge=0, lt=2 ** 64)
    warmup_blocks: Optional[NonNegativeInt] = None
    constellation: Literal["QPSK", "QAM16", "QAM64"] = "QPSK"
    equalizer: Optional[EqualizerKind] = None
    batch_size: PositiveInt = settings.SIM_BATCH_SIZE

    def to_domain(self, stats: SignalStats, threads: int) -> SimConfig:
        return SimConfig(
            n_blocks=self.n_blocks,
            seed=self.seed,
            warmup_blocks=self.warmup_blocks,
            stats=stats,
            constellation=Constellation.square_qam(self.constellation),
            equalizer=self.equalizer,
            batch_size=self.batch_size,
            threads=threads,
        )


class SweepSection(_Section):
    """
    TEQ-length or CP-length grid.

    A cp_len sweep searches TEQ lengths 2..mu at every point unless teq_len_grid is
    given or optimize_teq_len is switched off.
    """

    kind: Literal["teq_len", "cp_len"] = "teq_len"
    values: List[PositiveInt] = Field(default_factory=lambda: [2, 4, 8, 16, 32], min_length=1)
    teq_len: PositiveInt = settings.TEQ_LENGTH
    teq_len_grid: Optional[List[PositiveInt]] = None
    optimize_teq_len: Optional[bool] = None
    delays: Optional[List[NonNegativeInt]] = None
    conventional_max_len: Optional[PositiveInt] = None

    def to_domain(self) -> SweepSpec:
        if self.optimize_teq_len is not None:
            up_to_cp = self.optimize_teq_len
        else:
            up_to_cp = self.kind == "cp_len" and self.teq_len_grid is None
        return SweepSpec(
            kind=self.kind,
            values=tuple(self.values),
            teq_len=self.teq_len,
            teq_len_grid=tuple(self.teq_len_grid) if self.teq_len_grid else None,
            delays=tuple(self.delays) if self.delays else settings.delay_grid(),
            teq_len_up_to_cp=up_to_cp,
        )


class TeqSection(_Section):
    teq_len: PositiveInt = settings.TEQ_LENGTH
    window_len: Optional[PositiveInt] = None
    delay: NonNegativeInt = settings.TEQ_DELAY_MIN


class OutputSection(_Section):
    path: Optional[Path] = None
    format: Literal["csv", "json"] = settings.OUTPUT_FORMAT


class RunConfig(_Section):
    ofdm: OFDMSection = Field(default_factory=OFDMSection)
    signal: SignalSection = Field(default_factory=SignalSection)
    rate: RateSection = Field(default_factory=RateSection)
    channel: ChannelSection = Field(default_factory=ChannelSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    teq: TeqSection = Field(default_factory=TeqSection)
    output: OutputSection = Field(default_factory=OutputSection)
    threads: PositiveInt = settings.THREADS

    @classmethod
    def from_file(cls, path: Union[str, Path, None]) -> "RunConfig":
        if path is None:
            return cls()
        path = Path(path)
        config = cls.model_validate_json(path.read_text(encoding="utf-8"))
        # CIR paths inside a run file are relative to the run file
        cir = config.channel.cir_path
        if cir is not None and not cir.is_absolute():
            channel = config.channel.model_copy(update={"cir_path": path.parent / cir})
            config = config.model_copy(update={"channel": channel})
        return config

    def with_overrides(self, **overrides) -> "RunConfig":
        """Apply CLI flags: cir, out, format, seed, threads (None means not given)"""
        update = {}
        if overrides.get("cir") is not None:
            update["channel"] = self.channel.model_copy(
                update={"cir_path": Path(overrides["cir"]), "synthetic": None}
            )
        output = {}
        if overrides.get("out") is not None:
            output["path"] = Path(overrides["out"])
        if overrides.get("format") is not None:
            output["format"] = overrides["format"]
        if output:
            update["output"] = self.output.model_copy(update=output)
        if overrides.get("seed") is not None:
            update["simulation"] = self.simulation.model_copy(update={"seed": overrides["seed"]})
        if overrides.get("threads") is not None:
            update["threads"] = overrides["threads"]
        # round-trip through validation so overrides obey the schema too
        return RunConfig.model_validate({**self.model_dump(), **{
            key: value.model_dump() if isinstance(value, BaseModel) else value
            for key, value in update.items()
        }})
