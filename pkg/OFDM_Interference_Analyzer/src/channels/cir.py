"""
CIR text files.

One tap per line, either "re,im" or "re". Lines starting with '#' are comments and
are collected into the description. An optional "rate_hz=<float>" header line sets
the sampling rate. Values are written with 17 significant digits so a save/load
round trip is bit-exact.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union
import logging
import math

import numpy as np

from ..config.settings import settings
from ..core.exceptions import ChannelError, CirParseError
from ..core.files import atomic_write_text
from ..core.model import ChannelModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class CirFile:
    taps: np.ndarray
    sampling_rate_hz: float
    description: str = ""

    def to_channel(self) -> ChannelModel:
        return ChannelModel(taps=self.taps, sampling_rate_hz=self.sampling_rate_hz)


def _parse_float(text: str, line_number: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise CirParseError(f"not a number: {text.strip()!r}", line_number) from None
    if not math.isfinite(value):
        raise CirParseError(f"non-finite value {text.strip()!r}", line_number)
    return value


def read_cir_file(path: PathLike) -> CirFile:
    path = Path(path)
    if not path.exists():
        raise ChannelError(f"CIR file not found: {path}")

    taps = []
    comments = []
    rate = None
    with path.open("r", encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            if line.lower().startswith("rate_hz="):
                if taps:
                    raise CirParseError("rate_hz header must precede the taps", line_number)
                rate = _parse_float(line.split("=", 1)[1], line_number)
                if rate <= 0:
                    raise CirParseError("rate_hz must be positive", line_number)
                continue

            fields = line.split(",")
            if len(fields) == 1:
                taps.append(complex(_parse_float(fields[0], line_number), 0.0))
            elif len(fields) == 2:
                taps.append(complex(
                    _parse_float(fields[0], line_number),
                    _parse_float(fields[1], line_number),
                ))
            else:
                raise CirParseError(f"expected 're' or 're,im', got {line!r}", line_number)

    if not taps:
        raise CirParseError(f"no taps found in {path}")

    return CirFile(
        taps=np.array(taps, dtype=np.complex128),
        sampling_rate_hz=rate if rate is not None else settings.SAMPLING_RATE_HZ,
        description="\n".join(comments),
    )


def load_cir(path: PathLike) -> ChannelModel:
    """Read a CIR file into a ChannelModel, taps in file order"""
    cir = read_cir_file(path)
    logger.debug("loaded %d taps from %s", cir.taps.size, path)
    return cir.to_channel()


def format_cir(ch: ChannelModel, description: Optional[str] = None) -> str:
    lines = []
    for comment in (description or "").splitlines():
        lines.append(f"# {comment}".rstrip())
    lines.append(f"rate_hz={ch.sampling_rate_hz:.17g}")
    real = ch.is_real
    for tap in ch.taps:
        if real:
            lines.append(f"{tap.real:.17g}")
        else:
            lines.append(f"{tap.real:.17g},{tap.imag:.17g}")
    return "\n".join(lines) + "\n"


def save_cir(ch: ChannelModel, path: PathLike, description: Optional[str] = None) -> Path:
    """Write a CIR file atomically"""
    return atomic_write_text(path, format_cir(ch, description))
