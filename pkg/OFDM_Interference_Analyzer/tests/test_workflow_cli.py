"""
Tests for the run-file schema, the LangGraph workflows and the command line.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError
from typer.testing import CliRunner

from app import app
from src.channels.cir import read_cir_file, save_cir
from src.config.run_config import RunConfig
from src.core.model import ChannelModel
from src.core.workflow import (
    channel_loader_node,
    create_analysis_workflow,
    create_sweep_workflow,
    initial_state,
)

runner = CliRunner()

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

SMALL_RUN = {
    "ofdm": {"n_subcarriers": 16, "redundancy": 0},
    "signal": {"sigma2_x": 1.0, "sigma2_q": 1e-4},
    "rate": {"active_tones": [1, 2, 3, 4, 5, 6, 7], "sampling_rate_hz": 1e6},
    "simulation": {"n_blocks": 1000, "seed": 11, "batch_size": 256},
    "sweep": {"kind": "teq_len", "values": [2, 3], "delays": [0, 1, 2, 3]},
}


def _run_file(tmp_path, overrides=None, name="run.json"):
    document = json.loads(json.dumps(SMALL_RUN))
    for section, values in (overrides or {}).items():
        document.setdefault(section, {}).update(values)
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return path


def _read_csv(path):
    return pd.read_csv(path, comment="#")


@pytest.fixture
def identity_cir(tmp_path):
    return save_cir(ChannelModel([1.0]), tmp_path / "identity.cir", "identity")


@pytest.fixture
def long_cir(tmp_path, random_channel):
    return save_cir(random_channel(20), tmp_path / "long.cir", "random")


class TestRunConfig:
    def test_defaults_without_file(self):
        config = RunConfig.from_file(None)
        assert config.ofdm.n_subcarriers == 512
        assert config.output.format == "csv"

    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_run_files_validate(self, path):
        config = RunConfig.from_file(path)
        assert config.channel.synthetic is not None

    def test_unknown_key_is_rejected(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"ofdm": {"n_subcarriers": 16, "cyclic": 4}}))
        with pytest.raises(ValidationError):
            RunConfig.from_file(path)

    def test_redundancy_must_be_below_block_size(self):
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"ofdm": {"n_subcarriers": 16, "redundancy": 16}})

    def test_both_channel_sources_rejected(self):
        with pytest.raises(ValidationError, match="not both"):
            RunConfig.model_validate({
                "channel": {"cir_path": "a.cir", "synthetic": {"kind": "two_ray"}},
            })

    def test_default_levels_normalize_signal(self):
        stats = RunConfig().signal.to_domain(2.208e6)
        assert stats.sigma2_x == 1.0
        assert stats.sigma2_q == pytest.approx(10 ** (-16.3))

    def test_absolute_levels(self):
        config = RunConfig.model_validate({"signal": {"absolute_levels": True}})
        stats = config.signal.to_domain(2.208e6)
        assert stats.sigma2_x == pytest.approx(10 ** (-0.7) * 2.208e6)
        assert stats.sigma2_q == pytest.approx(2.208e-11)

    def test_default_band_is_clipped(self):
        params = RunConfig().rate.to_domain(16, 1e6)
        assert params.active_tones == tuple(range(7, 16))

    def test_relative_cir_path_follows_run_file(self, tmp_path):
        sub = tmp_path / "runs"
        sub.mkdir()
        path = sub / "run.json"
        path.write_text(json.dumps({"channel": {"cir_path": "loop.cir"}}))
        assert RunConfig.from_file(path).channel.cir_path == sub / "loop.cir"

    def test_overrides_are_validated(self):
        config = RunConfig().with_overrides(seed=5, threads=2, format="json", out=None)
        assert config.simulation.seed == 5
        assert config.threads == 2
        assert config.output.format == "json"
        with pytest.raises(ValidationError):
            RunConfig().with_overrides(format="xml")

    def test_cir_override_replaces_synthetic_channel(self):
        config = RunConfig.model_validate({"channel": {"synthetic": {"kind": "two_ray"}}})
        channel = config.with_overrides(cir="loop.cir").channel
        assert channel.synthetic is None
        assert str(channel.cir_path) == "loop.cir"

    @pytest.mark.parametrize("sweep, expected", [
        ({"kind": "cp_len"}, True),
        ({"kind": "teq_len"}, False),
        ({"kind": "cp_len", "teq_len_grid": [4, 8]}, False),
        ({"kind": "cp_len", "optimize_teq_len": False}, False),
        ({"kind": "teq_len", "optimize_teq_len": True}, True),
    ])
    def test_cp_sweeps_search_teq_length_by_default(self, sweep, expected):
        spec = RunConfig.model_validate({"sweep": sweep}).sweep.to_domain()
        assert spec.teq_len_up_to_cp is expected


class TestWorkflows:
    def test_missing_channel_is_reported(self):
        result = create_analysis_workflow().invoke(initial_state(RunConfig()))
        assert "no channel given" in result["error_message"]
        assert result.get("table") is None

    def test_loader_resolves_domain_parameters(self, long_cir):
        config = RunConfig.model_validate(SMALL_RUN).with_overrides(cir=long_cir)
        state = channel_loader_node(initial_state(config))
        assert state.get("error_message") is None
        assert state["channel"].order == 20
        assert state["ofdm_config"].n_subcarriers == 16
        assert state["rate_params"].sampling_rate_hz == 1e6

    def test_long_tail_spans_several_blocks(self):
        config = RunConfig.model_validate({
            "channel": {"synthetic": {"kind": "tail_matched", "nu": 1500, "decay_rate": 0.002}},
        })
        result = create_analysis_workflow().invoke(initial_state(config))
        assert result.get("error_message") is None
        assert result["summary"]["m_span"] >= 2
        assert result["table_name"] == "analysis"
        assert len(result["table"]) == 512

    def test_truncation_records_discarded_energy(self, long_cir):
        config = RunConfig.model_validate({**SMALL_RUN, "channel": {"truncate_to": 5}})
        config = config.with_overrides(cir=long_cir)
        result = create_analysis_workflow().invoke(initial_state(config))
        assert result["summary"]["nu"] == 20
        assert 0 < result["summary"]["discarded_energy_fraction"] < 1

    def test_simulation_branch_adds_oracle_columns(self, long_cir):
        config = RunConfig.model_validate(SMALL_RUN).with_overrides(cir=long_cir)
        result = create_analysis_workflow().invoke(initial_state(config, simulate=True))
        assert result["table_name"] == "simulation"
        assert {"mc_sinr_db", "delta_db"} <= set(result["table"].columns)
        assert result["summary"]["n_blocks"] == 1000

    def test_sweep_covers_both_modes(self, long_cir):
        config = RunConfig.model_validate(SMALL_RUN).with_overrides(cir=long_cir)
        result = create_sweep_workflow().invoke(initial_state(config))
        assert result.get("error_message") is None
        assert set(result["table"]["mode"]) == {"Conventional", "Actual"}
        assert "best_rate_bps_actual" in result["summary"]


class TestCli:
    def test_analyze_identity_channel(self, tmp_path, identity_cir):
        out = tmp_path / "analysis.csv"
        result = runner.invoke(app, [
            "analyze", "-c", str(_run_file(tmp_path)), "--cir", str(identity_cir), "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        table = _read_csv(out)
        assert len(table) == 16
        np.testing.assert_allclose(table["sinr_db"], 40.0, atol=1e-9)
        assert out.read_text().startswith("# analysis/v1: tone,")

    @pytest.mark.parametrize("command", ["analyze", "simulate", "sweep"])
    def test_reruns_are_byte_identical(self, tmp_path, long_cir, command):
        run = _run_file(tmp_path)
        outputs = []
        for name in ("first.csv", "second.csv"):
            result = runner.invoke(app, [command, "-c", str(run), "--cir", str(long_cir), "-o", str(tmp_path / name)])
            assert result.exit_code == 0, result.output
            outputs.append((tmp_path / name).read_bytes())
        assert outputs[0] == outputs[1]

    def test_json_output(self, tmp_path, long_cir):
        out = tmp_path / "analysis.json"
        result = runner.invoke(app, [
            "analyze", "-c", str(_run_file(tmp_path)), "--cir", str(long_cir), "-o", str(out), "-f", "json",
        ])
        assert result.exit_code == 0, result.output
        text = out.read_text()
        document = json.loads(text)
        assert document["table"] == "analysis"
        assert document["version"] == 1
        assert len(document["rows"]) == 16
        assert text == json.dumps(document, sort_keys=True, indent=2) + "\n"

    def test_simulate_with_too_few_blocks(self, tmp_path, long_cir):
        run = _run_file(tmp_path, {"simulation": {"n_blocks": 500}})
        result = runner.invoke(app, ["simulate", "-c", str(run), "--cir", str(long_cir)])
        assert result.exit_code == 1

    def test_bad_cir_reports_line(self, tmp_path):
        cir = tmp_path / "bad.cir"
        cir.write_text("1.0\nabc\n")
        result = runner.invoke(app, [
            "analyze", "-c", str(_run_file(tmp_path)), "--cir", str(cir), "-o", str(tmp_path / "x.csv"),
        ])
        assert result.exit_code == 1
        assert "line 2" in result.output
        assert not (tmp_path / "x.csv").exists()

    def test_teq_design_writes_taps(self, tmp_path, long_cir):
        out = tmp_path / "teq.csv"
        run = _run_file(tmp_path, {"teq": {"teq_len": 4, "delay": 1}})
        result = runner.invoke(app, ["teq-design", "-c", str(run), "--cir", str(long_cir), "-o", str(out)])
        assert result.exit_code == 0, result.output
        taps = _read_csv(out)
        assert list(taps["tap"]) == [0, 1, 2, 3]
        assert np.sum(taps["re"] ** 2 + taps["im"] ** 2) == pytest.approx(1.0)

    def test_gen_channel_writes_loadable_cir(self, tmp_path):
        out = tmp_path / "two_ray.cir"
        result = runner.invoke(app, [
            "gen-channel", "--kind", "two_ray", "--delay", "40", "--gain", "0.5", "-o", str(out),
        ])
        assert result.exit_code == 0, result.output
        channel = read_cir_file(out).to_channel()
        assert channel.order == 40
        assert channel.taps[40] == 0.5

    def test_gen_channel_rejects_bad_gain(self, tmp_path):
        result = runner.invoke(app, [
            "gen-channel", "--kind", "two_ray", "--gain", "2", "-o", str(tmp_path / "c.cir"),
        ])
        assert result.exit_code == 1
