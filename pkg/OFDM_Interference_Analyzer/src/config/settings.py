import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


class Settings:
    """Application settings and defaults (DSL downstream parameter set)"""

    # Transceiver
    N_SUBCARRIERS = _env_int("OFDM_N_SUBCARRIERS", 512)
    REDUNDANCY = _env_int("OFDM_REDUNDANCY", 32)
    SCHEME = os.getenv("OFDM_SCHEME", "CP")
    SYNC_DELAY = _env_int("OFDM_SYNC_DELAY", 0)

    # Signal levels, both referred to a 100-ohm load
    SAMPLING_RATE_HZ = _env_float("OFDM_SAMPLING_RATE_HZ", 2.208e6)
    SIGNAL_PSD_DBM_HZ = _env_float("OFDM_SIGNAL_PSD_DBM_HZ", 23.0)
    NOISE_PSD_DBM_HZ = _env_float("OFDM_NOISE_PSD_DBM_HZ", -140.0)
    REFERENCE_IMPEDANCE_OHM = 100.0

    # Rate computation
    SER_TARGET = _env_float("OFDM_SER_TARGET", 1e-7)
    DESIGN_MARGIN_DB = _env_float("OFDM_DESIGN_MARGIN_DB", 6.0)
    CODING_GAIN_DB = _env_float("OFDM_CODING_GAIN_DB", 4.2)
    FIRST_ACTIVE_TONE = _env_int("OFDM_FIRST_ACTIVE_TONE", 7)
    LAST_ACTIVE_TONE = _env_int("OFDM_LAST_ACTIVE_TONE", 256)

    # TEQ design
    TEQ_LENGTH = _env_int("OFDM_TEQ_LENGTH", 16)
    TEQ_DELAY_MIN = _env_int("OFDM_TEQ_DELAY_MIN", 2)
    TEQ_DELAY_MAX = _env_int("OFDM_TEQ_DELAY_MAX", 50)

    # Monte Carlo
    SIM_BLOCKS = _env_int("OFDM_SIM_BLOCKS", 200_000)
    SIM_SEED = _env_int("OFDM_SIM_SEED", 0)
    SIM_BATCH_SIZE = _env_int("OFDM_SIM_BATCH_SIZE", 4096)

    # Execution and output
    THREADS = _env_int("OFDM_THREADS", 1)
    OUTPUT_DIR = Path(os.getenv("OFDM_OUTPUT_DIR", Path.cwd() / "results"))
    OUTPUT_FORMAT = os.getenv("OFDM_OUTPUT_FORMAT", "csv")

    @classmethod
    def active_tones(cls):
        return tuple(range(cls.FIRST_ACTIVE_TONE, cls.LAST_ACTIVE_TONE + 1))

    @classmethod
    def delay_grid(cls):
        return tuple(range(cls.TEQ_DELAY_MIN, cls.TEQ_DELAY_MAX + 1))

    @classmethod
    def validate_config(cls):
        """Validate that the defaults are mutually consistent"""
        if not 0 <= cls.REDUNDANCY < cls.N_SUBCARRIERS:
            raise ValueError("OFDM_REDUNDANCY must satisfy 0 <= mu < N")
        if cls.SCHEME not in ("CP", "ZP_OLA"):
            raise ValueError("OFDM_SCHEME must be CP or ZP_OLA")
        if not 0 <= cls.FIRST_ACTIVE_TONE <= cls.LAST_ACTIVE_TONE < cls.N_SUBCARRIERS:
            raise ValueError("active tone range must lie inside 0..N-1")
        if not 0 < cls.SER_TARGET < 1:
            raise ValueError("OFDM_SER_TARGET must lie in (0, 1)")
        if cls.OUTPUT_FORMAT not in ("csv", "json"):
            raise ValueError("OFDM_OUTPUT_FORMAT must be csv or json")
        if cls.THREADS < 1:
            raise ValueError("OFDM_THREADS must be positive")

        return True

# Global settings instance
settings = Settings()
