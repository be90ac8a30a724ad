"""
Exception hierarchy for the OFDM interference analyzer.

Every error raised on purpose by the library derives from OFDMAnalysisError so the
CLI can turn it into a clean message and a nonzero exit code.
"""

from typing import Optional


class OFDMAnalysisError(Exception):
    """Base class for all analyzer errors"""


class InvalidConfigurationError(OFDMAnalysisError, ValueError):
    """A configuration value violates a domain invariant"""


class ChannelError(OFDMAnalysisError, ValueError):
    """An impulse response is unusable (empty, all-zero, non-finite, too long)"""


class CirParseError(ChannelError):
    """A CIR text file could not be parsed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EqualizerError(OFDMAnalysisError, ValueError):
    """An equalizer cannot be built for the given channel diagonal"""

    def __init__(self, message: str, tone: Optional[int] = None):
        self.tone = tone
        super().__init__(message)


class SimulationError(OFDMAnalysisError, ValueError):
    """Monte Carlo parameters are inconsistent with the channel"""


class TeqDesignError(OFDMAnalysisError, ValueError):
    """A TEQ design problem is ill-posed"""
