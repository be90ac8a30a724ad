import logging
import sys
from pathlib import Path
from typing import Optional

import pandas as pd
import typer
from pydantic import ValidationError
from rich.logging import RichHandler

# Add src to path for imports
sys.path.append(str(Path(__file__).parent / "src"))

from src.channels.cir import save_cir
from src.config.run_config import RunConfig, SyntheticChannelSection
from src.config.settings import settings
from src.core.exceptions import OFDMAnalysisError
from src.core.teq import design_mssnr, score_design
from src.core.workflow import (
    build_synthetic_channel,
    channel_loader_node,
    create_analysis_workflow,
    create_sweep_workflow,
    initial_state,
)
from src.ui.components import (
    console,
    display_error_message,
    display_rate,
    display_success,
    display_summary,
    display_table_preview,
)
from src.ui.writers import write_table

app = typer.Typer(
    help="Exact ISI/ICI SINR and achievable-rate analysis for CP/ZP-OFDM over long FIR channels.",
    add_completion=False,
    no_args_is_help=True,
)

ConfigOption = typer.Option(None, "--config", "-c", help="JSON run file", exists=True, dir_okay=False)
CirOption = typer.Option(None, "--cir", help="CIR text file (overrides the run file channel)")
OutOption = typer.Option(None, "--out", "-o", help="Output file")
FormatOption = typer.Option(None, "--format", "-f", help="csv or json")
ThreadsOption = typer.Option(None, "--threads", min=1, help="Worker threads")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Debug logging")


def setup_logging(verbose: bool):
    """Route library logging through rich on stderr"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=verbose, markup=False)],
        force=True,
    )


def load_run_config(config: Optional[Path], **overrides) -> RunConfig:
    """Validate the run file and apply command-line overrides"""
    try:
        return RunConfig.from_file(config).with_overrides(**overrides)
    except ValidationError as e:
        display_error_message(f"Invalid run configuration:\n{e}")
        raise typer.Exit(code=1)
    except (OSError, ValueError) as e:
        display_error_message(f"Could not read run configuration: {e}")
        raise typer.Exit(code=1)


def output_path(run_config: RunConfig, command: str) -> Path:
    if run_config.output.path is not None:
        return run_config.output.path
    return settings.OUTPUT_DIR / f"{command}.{run_config.output.format}"


def finish(result: dict, run_config: RunConfig, command: str):
    """Report a workflow result and write its table, or exit with code 1"""
    if result.get("error_message"):
        display_error_message(result["error_message"])
        raise typer.Exit(code=1)

    display_summary(result["summary"])
    display_table_preview(result["table"])
    if result["summary"].get("rate_bps") is not None:
        display_rate(result["summary"]["rate_bps"])
    if result["summary"].get("mc_rate_bps") is not None:
        display_rate(result["summary"]["mc_rate_bps"], label="Monte Carlo rate")

    path = output_path(run_config, command)
    try:
        write_table(result["table"], result["summary"], path, run_config.output.format, result["table_name"])
    except (OSError, OFDMAnalysisError) as e:
        display_error_message(f"Could not write {path}: {e}")
        raise typer.Exit(code=1)
    display_success(f"Results written to {path}")


@app.command()
def analyze(
    config: Optional[Path] = ConfigOption,
    cir: Optional[Path] = CirOption,
    out: Optional[Path] = OutOption,
    fmt: Optional[str] = FormatOption,
    threads: Optional[int] = ThreadsOption,
    verbose: bool = VerboseOption,
):
    """Per-tone signal, ISI, ICI and noise powers, SINR, bits and the aggregate rate."""
    setup_logging(verbose)
    run_config = load_run_config(config, cir=cir, out=out, format=fmt, threads=threads)
    result = create_analysis_workflow().invoke(initial_state(run_config, simulate=False))
    finish(result, run_config, "analyze")


@app.command()
def simulate(
    config: Optional[Path] = ConfigOption,
    cir: Optional[Path] = CirOption,
    out: Optional[Path] = OutOption,
    fmt: Optional[str] = FormatOption,
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Unsigned 64-bit simulation seed"),
    threads: Optional[int] = ThreadsOption,
    verbose: bool = VerboseOption,
):
    """Analytic table side by side with the Monte Carlo oracle and the per-tone delta."""
    setup_logging(verbose)
    run_config = load_run_config(config, cir=cir, out=out, format=fmt, seed=seed, threads=threads)
    result = create_analysis_workflow().invoke(initial_state(run_config, simulate=True))
    finish(result, run_config, "simulate")


@app.command()
def sweep(
    config: Optional[Path] = ConfigOption,
    cir: Optional[Path] = CirOption,
    out: Optional[Path] = OutOption,
    fmt: Optional[str] = FormatOption,
    threads: Optional[int] = ThreadsOption,
    verbose: bool = VerboseOption,
):
    """Best-delay rate over a TEQ-length or CP-length grid, Conventional and Actual."""
    setup_logging(verbose)
    run_config = load_run_config(config, cir=cir, out=out, format=fmt, threads=threads)
    result = create_sweep_workflow().invoke(initial_state(run_config))
    finish(result, run_config, "sweep")


@app.command("teq-design")
def teq_design(
    config: Optional[Path] = ConfigOption,
    cir: Optional[Path] = CirOption,
    out: Optional[Path] = OutOption,
    fmt: Optional[str] = FormatOption,
    verbose: bool = VerboseOption,
):
    """Design one MSSNR TEQ and write its taps."""
    setup_logging(verbose)
    run_config = load_run_config(config, cir=cir, out=out, format=fmt)

    state = channel_loader_node(initial_state(run_config))
    if state.get("error_message"):
        display_error_message(state["error_message"])
        raise typer.Exit(code=1)

    cfg = state["ofdm_config"]
    teq = run_config.teq
    window_len = teq.window_len or cfg.redundancy + 1
    try:
        design = design_mssnr(state["channel"], teq.teq_len, window_len, teq.delay)
        rate = score_design(
            state["channel"], cfg, state["signal_stats"], state["rate_params"], design
        )
    except OFDMAnalysisError as e:
        display_error_message(f"TEQ design: {e}")
        raise typer.Exit(code=1)

    taps = design.taps
    table = pd.DataFrame({"tap": range(design.length), "re": taps.real, "im": taps.imag})
    result = {
        "table": table,
        "table_name": "teq",
        "summary": {
            "teq_len": design.length,
            "delay": design.delay,
            "window_len": design.window_len,
            "shortening_snr_db": design.shortening_snr_db,
            "rate_bps": rate,
            "nu": state["channel"].order,
            "redundancy": cfg.redundancy,
        },
    }
    console.print(f"🎯 Shortening SNR {design.shortening_snr_db:.3f} dB at delay {design.delay}")
    finish(result, run_config, "teq-design")


@app.command("gen-channel")
def gen_channel(
    kind: Optional[str] = typer.Option(None, "--kind", help="exponential, two_ray or tail_matched"),
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    nu: Optional[int] = typer.Option(None, "--nu", min=0),
    decay_rate: Optional[float] = typer.Option(None, "--decay-rate"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0),
    delay: Optional[int] = typer.Option(None, "--delay", min=0),
    gain: Optional[float] = typer.Option(None, "--gain"),
    split_index: Optional[int] = typer.Option(None, "--split-index", min=1),
    tail_fraction: Optional[float] = typer.Option(None, "--tail-fraction"),
    verbose: bool = VerboseOption,
):
    """Write a synthetic CIR file."""
    setup_logging(verbose)
    run_config = load_run_config(config, out=out)

    base = run_config.channel.synthetic
    fields = base.model_dump() if base is not None else {"kind": "exponential"}
    if kind is not None:
        fields["kind"] = kind
    given = {
        "nu": nu, "decay_rate": decay_rate, "seed": seed, "delay": delay, "gain": gain,
        "split_index": split_index, "tail_fraction": tail_fraction,
    }
    fields.update({key: value for key, value in given.items() if value is not None})

    try:
        synthetic = SyntheticChannelSection.model_validate(fields)
        channel = build_synthetic_channel(synthetic, run_config.channel.sampling_rate_hz)
    except ValidationError as e:
        display_error_message(f"Invalid channel parameters:\n{e}")
        raise typer.Exit(code=1)
    except OFDMAnalysisError as e:
        display_error_message(f"Channel generation: {e}")
        raise typer.Exit(code=1)

    description = "synthetic channel " + " ".join(
        f"{key}={value}" for key, value in sorted(synthetic.model_dump().items())
    )
    path = run_config.output.path or settings.OUTPUT_DIR / "channel.cir"
    try:
        save_cir(channel, path, description)
    except OSError as e:
        display_error_message(f"Could not write {path}: {e}")
        raise typer.Exit(code=1)
    display_success(f"{synthetic.kind} channel with nu={channel.order} written to {path}")


def main():
    app()


if __name__ == "__main__":
    main()
