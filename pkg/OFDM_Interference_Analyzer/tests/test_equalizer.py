"""
Unit tests for the one-tap equalizers.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core.analysis import interference_matrices
from src.core.equalizer import (
    EqualizerKind,
    channel_diagonal,
    make_equalizer,
    reference_diagonal,
)
from src.core.exceptions import ChannelError, EqualizerError
from src.core.model import ChannelModel, OFDMConfig, Scheme, dft_matrix


class TestChannelDiagonal:
    def test_matches_scaled_dft_of_padded_taps(self, random_channel):
        ch = random_channel(5)
        padded = np.concatenate([ch.taps, np.zeros(11)])
        expected = np.sqrt(16) * dft_matrix(16) @ padded
        assert_allclose(channel_diagonal(ch, 16), expected, atol=1e-12)

    def test_channel_longer_than_dft_raises_error(self, random_channel):
        with pytest.raises(ChannelError):
            channel_diagonal(random_channel(16), 16)

    def test_reference_diagonal_is_desired_gain(self, random_channel):
        cfg = OFDMConfig(n_subcarriers=16, redundancy=2, sync_delay=3)
        ch = random_channel(9)
        assert_allclose(
            reference_diagonal(cfg, ch), np.diag(interference_matrices(cfg, ch).b_full), atol=1e-12
        )

    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_reference_diagonal_with_sufficient_redundancy(self, random_channel, scheme):
        cfg = OFDMConfig(n_subcarriers=16, redundancy=4, scheme=scheme)
        ch = random_channel(4)
        assert_allclose(
            reference_diagonal(cfg, ch), np.diag(interference_matrices(cfg, ch).b_full), atol=1e-12
        )


class TestMakeEqualizer:
    def test_zero_forcing_inverts_diagonal(self, random_channel):
        d = channel_diagonal(random_channel(3), 16)
        eq = make_equalizer(EqualizerKind.ZF, d)
        assert_allclose(eq.coeffs * d, np.ones(16), atol=1e-12)

    def test_zero_forcing_restores_symbols(self, rng, random_channel):
        cfg = OFDMConfig(n_subcarriers=16, redundancy=4)
        ch = random_channel(4)
        b = interference_matrices(cfg, ch).b_full
        eq = make_equalizer("ZF", reference_diagonal(cfg, ch))
        x = rng.standard_normal((10, 16)) + 1j * rng.standard_normal((10, 16))
        assert_allclose(eq.apply(x @ b.T), x, atol=1e-10)

    def test_spectral_null_names_tone(self):
        d = np.array([1.0, 2.0, 0.0, 1.0])
        with pytest.raises(EqualizerError) as excinfo:
            make_equalizer(EqualizerKind.ZF, d)
        assert excinfo.value.tone == 2

    def test_mmse_coefficients(self):
        d = np.array([1.0, 2j, 0.0])
        eq = make_equalizer(EqualizerKind.MMSE, d, snr=4.0)
        assert_allclose(eq.coeffs, d.conj() / (np.abs(d) ** 2 + 0.25))

    def test_mmse_approaches_zero_forcing_at_high_snr(self, random_channel):
        d = channel_diagonal(random_channel(3), 8)
        mmse = make_equalizer(EqualizerKind.MMSE, d, snr=1e12).coeffs
        assert_allclose(mmse, make_equalizer(EqualizerKind.ZF, d).coeffs, rtol=1e-9)

    def test_mmse_needs_positive_snr(self):
        with pytest.raises(EqualizerError):
            make_equalizer(EqualizerKind.MMSE, np.ones(4), snr=0.0)

    def test_identity(self):
        eq = make_equalizer("IDENTITY", np.array([3.0, 0.0]))
        assert_allclose(eq.coeffs, [1.0, 1.0])

    def test_apply_broadcasts_over_blocks(self):
        eq = make_equalizer(EqualizerKind.ZF, np.array([2.0, 4.0]))
        assert_allclose(eq.apply(np.array([[2.0, 4.0], [4.0, 8.0]])), [[1.0, 1.0], [2.0, 2.0]])


class TestChannelModelIntegration:
    def test_single_tap_channel_diagonal(self):
        assert_allclose(channel_diagonal(ChannelModel([0.5]), 4), np.full(4, 0.5))
