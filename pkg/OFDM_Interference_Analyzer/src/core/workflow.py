from langgraph.graph import StateGraph, START, END
from typing import TypedDict, Optional, Dict, Any
import logging

import numpy as np
import pandas as pd

from ..channels.cir import read_cir_file
from ..channels.synthetic import (
    synth_exponential,
    synth_tail_matched,
    synth_two_ray,
    truncate_cir,
)
from ..config.run_config import RunConfig, SyntheticChannelSection
from ..config.settings import settings
from .analysis import InterferenceReport, SignalStats, analyze
from .exceptions import ChannelError, OFDMAnalysisError
from .model import ChannelModel, OFDMConfig
from .montecarlo import SimResult, simulate_stream
from .rate import RateParams, linear_to_db, rate_from_sinr, snr_gap, tone_capacities
from .teq import AnalysisMode, sweep_rate

logger = logging.getLogger(__name__)


# Define the workflow states
class AnalysisState(TypedDict):
    run_config: RunConfig
    simulate: bool
    channel: Optional[ChannelModel]
    channel_description: Optional[str]
    analysis_channel: Optional[ChannelModel]
    discarded_fraction: Optional[float]
    ofdm_config: Optional[OFDMConfig]
    signal_stats: Optional[SignalStats]
    rate_params: Optional[RateParams]
    report: Optional[InterferenceReport]
    bits: Optional[np.ndarray]
    rate_bps: Optional[float]
    sim_result: Optional[SimResult]
    sweep_table: Optional[pd.DataFrame]
    table: Optional[pd.DataFrame]
    table_name: Optional[str]
    summary: Optional[Dict[str, Any]]
    error_message: Optional[str]


def initial_state(run_config: RunConfig, simulate: bool = False) -> AnalysisState:
    return AnalysisState(
        run_config=run_config,
        simulate=simulate,
        channel=None,
        channel_description=None,
        analysis_channel=None,
        discarded_fraction=None,
        ofdm_config=None,
        signal_stats=None,
        rate_params=None,
        report=None,
        bits=None,
        rate_bps=None,
        sim_result=None,
        sweep_table=None,
        table=None,
        table_name=None,
        summary=None,
        error_message=None,
    )


def build_synthetic_channel(section: SyntheticChannelSection, sampling_rate_hz: float) -> ChannelModel:
    """Generate the synthetic channel a run file describes"""
    if section.kind == "exponential":
        return synth_exponential(section.nu, section.decay_rate, section.seed, sampling_rate_hz)
    if section.kind == "two_ray":
        return synth_two_ray(section.delay, section.gain, sampling_rate_hz)
    return synth_tail_matched(
        section.nu, section.split_index, section.tail_fraction, section.decay_rate, section.seed,
        sampling_rate_hz,
    )


def _fail(state: AnalysisState, stage: str, error: Exception) -> AnalysisState:
    if isinstance(error, OFDMAnalysisError):
        state["error_message"] = f"{stage}: {error}"
    else:
        logger.debug("unexpected failure in %s", stage, exc_info=True)
        state["error_message"] = f"{stage} failed unexpectedly: {error}"
    return state


def channel_loader_node(state: AnalysisState) -> AnalysisState:
    """
    Node that loads the channel and resolves the domain parameters against it
    """
    config = state["run_config"]
    section = config.channel

    try:
        if section.cir_path is not None:
            logger.info("🔍 Loading CIR from %s", section.cir_path)
            cir = read_cir_file(section.cir_path)
            channel = cir.to_channel()
            state["channel_description"] = cir.description
        elif section.synthetic is not None:
            logger.info("🔍 Generating %s channel", section.synthetic.kind)
            channel = build_synthetic_channel(section.synthetic, section.sampling_rate_hz)
            state["channel_description"] = f"synthetic {section.synthetic.kind}"
        else:
            raise ChannelError("no channel given: set channel.cir_path, channel.synthetic or --cir")

        cfg = config.ofdm.to_domain()
        state["channel"] = channel
        state["ofdm_config"] = cfg
        state["signal_stats"] = config.signal.to_domain(channel.sampling_rate_hz)
        state["rate_params"] = config.rate.to_domain(cfg.n_subcarriers, channel.sampling_rate_hz)
        logger.info("📡 Channel order nu=%d, energy %.6g", channel.order, channel.energy)

    except Exception as e:
        return _fail(state, "Loading channel", e)

    return state


def channel_truncator_node(state: AnalysisState) -> AnalysisState:
    """
    Node that truncates the analysed CIR when the run asks for a Conventional analysis
    """
    if state.get("error_message"):
        return state

    max_len = state["run_config"].channel.truncate_to
    try:
        if max_len is None:
            state["analysis_channel"] = state["channel"]
            state["discarded_fraction"] = 0.0
        else:
            truncated = truncate_cir(state["channel"], max_len)
            state["analysis_channel"] = truncated.channel
            state["discarded_fraction"] = truncated.discarded_fraction
            logger.info(
                "✂️ Truncated CIR to %d taps, %.4f of the energy discarded",
                max_len, truncated.discarded_fraction,
            )
    except Exception as e:
        return _fail(state, "Truncating channel", e)

    return state


def interference_analyzer_node(state: AnalysisState) -> AnalysisState:
    """
    Node that computes the per-tone signal, ISI, ICI and noise powers
    """
    if state.get("error_message"):
        return state

    cfg = state["ofdm_config"]
    logger.info(
        "🧮 Analysing N=%d, mu=%d, %s, Delta=%d",
        cfg.n_subcarriers, cfg.redundancy, cfg.scheme.value, cfg.sync_delay,
    )
    try:
        state["report"] = analyze(cfg, state["analysis_channel"], state["signal_stats"])
    except Exception as e:
        return _fail(state, "Interference analysis", e)

    return state


def rate_calculator_node(state: AnalysisState) -> AnalysisState:
    """
    Node that turns the SINR profile into bits per tone and the aggregate rate
    """
    if state.get("error_message"):
        return state

    try:
        params = state["rate_params"]
        report = state["report"]
        state["bits"] = tone_capacities(report.sinr, snr_gap(params))
        state["rate_bps"] = rate_from_sinr(report.sinr, state["ofdm_config"], params)
        logger.info("📈 Achievable rate %.6g bit/s", state["rate_bps"])
    except Exception as e:
        return _fail(state, "Rate calculation", e)

    return state


def montecarlo_simulator_node(state: AnalysisState) -> AnalysisState:
    """
    Node that runs the time-domain Monte Carlo oracle on the full channel
    """
    if state.get("error_message"):
        return state

    config = state["run_config"]
    try:
        sim = config.simulation.to_domain(state["signal_stats"], config.threads)
        state["sim_result"] = simulate_stream(state["ofdm_config"], state["channel"], sim)
    except Exception as e:
        return _fail(state, "Monte Carlo simulation", e)

    return state


def sweep_runner_node(state: AnalysisState) -> AnalysisState:
    """
    Node that runs the TEQ sweep in Conventional and Actual mode
    """
    if state.get("error_message"):
        return state

    config = state["run_config"]
    cfg = state["ofdm_config"]
    max_len = config.sweep.conventional_max_len or cfg.n_subcarriers
    try:
        sweep = config.sweep.to_domain()
        tables = []
        for mode in (AnalysisMode.CONVENTIONAL, AnalysisMode.ACTUAL):
            logger.info("🔁 Sweeping %s over %s in %s mode", sweep.kind.value, list(sweep.values), mode.value)
            tables.append(sweep_rate(
                state["channel"], cfg, state["rate_params"], sweep,
                mode=mode, max_len=max_len, stats=state["signal_stats"],
                threads=config.threads,
            ))
        state["sweep_table"] = pd.concat(tables, ignore_index=True)
    except Exception as e:
        return _fail(state, "Sweep", e)

    return state


def _analysis_table(state: AnalysisState) -> pd.DataFrame:
    report = state["report"]
    table = report.to_frame()
    table["bits"] = state["bits"]
    active = np.zeros(report.n_subcarriers, dtype=int)
    active[list(state["rate_params"].active_tones)] = 1
    table["active"] = active
    return table


def _base_summary(state: AnalysisState) -> Dict[str, Any]:
    cfg = state["ofdm_config"]
    stats = state["signal_stats"]
    return {
        "n_subcarriers": cfg.n_subcarriers,
        "redundancy": cfg.redundancy,
        "scheme": cfg.scheme.value,
        "sync_delay": cfg.sync_delay,
        "nu": state["channel"].order,
        "sampling_rate_hz": state["rate_params"].sampling_rate_hz,
        "sigma2_x": stats.sigma2_x,
        "sigma2_q": stats.sigma2_q,
        "snr_gap_db": float(linear_to_db(snr_gap(state["rate_params"]))),
        "reference_impedance_ohm": settings.REFERENCE_IMPEDANCE_OHM,
        "channel": state["channel_description"] or "",
    }


def report_builder_node(state: AnalysisState) -> AnalysisState:
    """
    Node that assembles the output table and the run summary
    """
    if state.get("error_message"):
        return state

    summary = _base_summary(state)

    if state.get("sweep_table") is not None:
        table = state["sweep_table"]
        summary["sweep"] = state["run_config"].sweep.kind
        summary["conventional_max_len"] = (
            state["run_config"].sweep.conventional_max_len or summary["n_subcarriers"]
        )
        for mode, rows in table.groupby("mode", sort=True):
            summary[f"best_rate_bps_{mode.lower()}"] = float(rows["rate_bps"].max())
        state["table"] = table
        state["table_name"] = "sweep"
        state["summary"] = summary
        return state

    report = state["report"]
    table = _analysis_table(state)
    summary.update({
        "rate_bps": state["rate_bps"],
        "m_span": report.m_span,
        "rho": report.rho,
        "discarded_energy_fraction": state["discarded_fraction"],
    })
    state["table_name"] = "analysis"

    sim = state.get("sim_result")
    if sim is not None:
        mc = sim.to_frame()
        table = table.merge(mc, on="tone", how="left", validate="one_to_one")
        with np.errstate(invalid="ignore"):
            table["delta_db"] = table["mc_sinr_db"] - table["sinr_db"]
        tones = list(state["rate_params"].active_tones)
        deltas = table.loc[tones, "delta_db"].abs()
        summary.update({
            "mc_rate_bps": rate_from_sinr(sim.sinr, state["ofdm_config"], state["rate_params"]),
            "n_blocks": sim.n_blocks_used,
            "seed": state["run_config"].simulation.seed,
            "max_abs_delta_db": float(deltas.max()) if deltas.notna().any() else float("nan"),
        })
        state["table_name"] = "simulation"

    state["table"] = table
    state["summary"] = summary
    return state


def route_after_rate(state: AnalysisState) -> str:
    if state.get("simulate") and not state.get("error_message"):
        return "simulate"
    return "report"


def create_analysis_workflow():
    """
    Create and return the analysis workflow graph
    """
    workflow = StateGraph(AnalysisState)

    # Add nodes
    workflow.add_node("channel_loader", channel_loader_node)
    workflow.add_node("channel_truncator", channel_truncator_node)
    workflow.add_node("interference_analyzer", interference_analyzer_node)
    workflow.add_node("rate_calculator", rate_calculator_node)
    workflow.add_node("montecarlo_simulator", montecarlo_simulator_node)
    workflow.add_node("report_builder", report_builder_node)

    # Add edges
    workflow.add_edge(START, "channel_loader")
    workflow.add_edge("channel_loader", "channel_truncator")
    workflow.add_edge("channel_truncator", "interference_analyzer")
    workflow.add_edge("interference_analyzer", "rate_calculator")
    workflow.add_conditional_edges(
        "rate_calculator",
        route_after_rate,
        {"simulate": "montecarlo_simulator", "report": "report_builder"},
    )
    workflow.add_edge("montecarlo_simulator", "report_builder")
    workflow.add_edge("report_builder", END)

    return workflow.compile()


def create_sweep_workflow():
    """
    Create and return the sweep workflow graph
    """
    workflow = StateGraph(AnalysisState)

    workflow.add_node("channel_loader", channel_loader_node)
    workflow.add_node("sweep_runner", sweep_runner_node)
    workflow.add_node("report_builder", report_builder_node)

    workflow.add_edge(START, "channel_loader")
    workflow.add_edge("channel_loader", "sweep_runner")
    workflow.add_edge("sweep_runner", "report_builder")
    workflow.add_edge("report_builder", END)

    return workflow.compile()
