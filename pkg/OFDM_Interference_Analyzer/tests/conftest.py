import numpy as np
import pytest

from src.core.model import ChannelModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_channel(rng):
    """Factory for random complex (or real) channels of a given order"""

    def make(nu: int, real: bool = False) -> ChannelModel:
        taps = rng.standard_normal(nu + 1)
        if not real:
            taps = taps + 1j * rng.standard_normal(nu + 1)
        return ChannelModel(taps=taps)

    return make
