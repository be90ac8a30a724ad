"""
Tests for CIR files, truncation and the synthetic channel generators.
"""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.channels.cir import format_cir, load_cir, read_cir_file, save_cir
from src.channels.synthetic import (
    synth_exponential,
    synth_tail_matched,
    synth_two_ray,
    tail_energy_fraction,
    truncate_cir,
)
from src.core.exceptions import ChannelError, CirParseError
from src.core.model import ChannelModel


class TestReadCir:
    def test_complex_and_real_lines(self, tmp_path):
        path = tmp_path / "loop.cir"
        path.write_text("# measured loop\nrate_hz=1e6\n1.0,0.5\n-0.25\n\n0,1e-3\n")
        cir = read_cir_file(path)
        assert cir.sampling_rate_hz == 1e6
        assert cir.description == "measured loop"
        assert_array_equal(cir.taps, [1.0 + 0.5j, -0.25, 1e-3j])

    def test_default_rate(self, tmp_path):
        path = tmp_path / "loop.cir"
        path.write_text("1\n")
        assert load_cir(path).sampling_rate_hz == 2.208e6

    def test_bad_number_reports_line(self, tmp_path):
        path = tmp_path / "loop.cir"
        path.write_text("1.0\nabc\n")
        with pytest.raises(CirParseError, match="line 2") as excinfo:
            read_cir_file(path)
        assert excinfo.value.line_number == 2

    @pytest.mark.parametrize("text", ["1,2,3\n", "nan\n", "1,inf\n"])
    def test_malformed_tap_lines(self, tmp_path, text):
        path = tmp_path / "loop.cir"
        path.write_text(text)
        with pytest.raises(CirParseError, match="line 1"):
            read_cir_file(path)

    def test_rate_header_after_taps(self, tmp_path):
        path = tmp_path / "loop.cir"
        path.write_text("1.0\nrate_hz=1e6\n")
        with pytest.raises(CirParseError, match="precede"):
            read_cir_file(path)

    def test_file_without_taps(self, tmp_path):
        path = tmp_path / "loop.cir"
        path.write_text("# nothing here\n")
        with pytest.raises(CirParseError):
            read_cir_file(path)

    def test_all_zero_taps_are_rejected(self, tmp_path):
        path = tmp_path / "loop.cir"
        path.write_text("0\n0\n")
        with pytest.raises(ChannelError):
            load_cir(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ChannelError, match="not found"):
            load_cir(tmp_path / "missing.cir")


class TestSaveCir:
    def test_round_trip_is_bit_exact(self, tmp_path, random_channel):
        ch = random_channel(40)
        path = save_cir(ch, tmp_path / "out" / "ch.cir", description="random\nsecond line")
        loaded = read_cir_file(path)
        assert loaded.to_channel() == ch
        assert loaded.description == "random\nsecond line"

    def test_real_channel_written_as_single_column(self):
        text = format_cir(ChannelModel([1.0, 0.1]))
        assert text.splitlines()[1:] == ["1", "0.10000000000000001"]


class TestTruncation:
    def test_discarded_fraction(self):
        ch = ChannelModel([1.0, 1.0, 1.0, 1.0])
        truncated = truncate_cir(ch, 3)
        assert truncated.channel.order == 2
        assert truncated.discarded_fraction == pytest.approx(0.25)

    def test_longer_limit_keeps_channel(self, random_channel):
        ch = random_channel(5)
        truncated = truncate_cir(ch, 6)
        assert truncated.channel is ch
        assert truncated.discarded_fraction == 0.0

    def test_invalid_length(self, random_channel):
        with pytest.raises(ChannelError):
            truncate_cir(random_channel(5), 0)

    def test_tail_energy_fraction(self):
        ch = ChannelModel([2.0, 1.0, 1.0])
        assert tail_energy_fraction(ch, 1) == pytest.approx(2.0 / 6.0)
        assert tail_energy_fraction(ch, 0) == pytest.approx(1.0)

    def test_tail_matched_channel_discards_matched_share(self):
        ch = synth_tail_matched(1500, 512, 0.2118, decay_rate=0.002, seed=5)
        truncated = truncate_cir(ch, 512)
        assert truncated.channel.order == 511
        assert truncated.discarded_fraction == pytest.approx(0.2118, abs=1e-4)


class TestSynthetic:
    def test_exponential_is_seeded(self):
        a = synth_exponential(100, 0.05, seed=7)
        assert a.order == 100
        assert a == synth_exponential(100, 0.05, seed=7)
        assert a != synth_exponential(100, 0.05, seed=8)

    def test_exponential_decays(self):
        ch = synth_exponential(2000, 0.01, seed=1)
        assert tail_energy_fraction(ch, 1000) < 1e-6

    @pytest.mark.parametrize("index", [0, 100, 400, 800, 1200, 1450])
    def test_exponential_tail_energy_matches_geometric_sum(self, index):
        nu, decay = 1500, 0.005
        ratio = np.exp(-2.0 * decay)
        expected = (ratio ** index - ratio ** (nu + 1)) / (1.0 - ratio)
        tails = [
            np.sum(np.abs(synth_exponential(nu, decay, seed=seed).taps[index:]) ** 2)
            for seed in range(7, 107)
        ]
        assert np.mean(tails) == pytest.approx(expected, rel=0.2)

    @pytest.mark.parametrize("nu, decay", [(-1, 0.1), (10, 0.0)])
    def test_exponential_invalid_parameters(self, nu, decay):
        with pytest.raises(ChannelError):
            synth_exponential(nu, decay, seed=0)

    def test_two_ray(self):
        ch = synth_two_ray(700, 0.9)
        assert ch.order == 700
        assert ch.taps[0] == 1.0
        assert ch.taps[700] == 0.9
        assert np.count_nonzero(ch.taps) == 2

    def test_two_ray_zero_delay_adds_gains(self):
        assert_array_equal(synth_two_ray(0, 0.5).taps, [1.5])

    def test_two_ray_gain_bound(self):
        with pytest.raises(ChannelError):
            synth_two_ray(10, 1.5)

    @pytest.mark.parametrize("fraction", [0.0, 0.2118, 0.5])
    def test_tail_matched_fraction(self, fraction):
        ch = synth_tail_matched(1500, 512, fraction, decay_rate=0.002, seed=3)
        assert ch.order == 1500
        assert tail_energy_fraction(ch, 512) == pytest.approx(fraction, abs=1e-12)

    def test_tail_matched_invalid_split(self):
        with pytest.raises(ChannelError):
            synth_tail_matched(100, 101, 0.2, decay_rate=0.01, seed=0)
