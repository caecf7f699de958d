"""Fluid reflecting-and-emitting surface: channel simulation, closed-form
phase/split optimization, swarm placement search, and Monte Carlo sweeps."""

from .baseline import BaselineConfig, evaluate_baseline, star_ris_placement
from .channel import (
    ChannelRealization,
    CorrelationModel,
    LinkParams,
    channel_at,
    correlated_nlos,
    correlation_matrix,
    synthesize_channel,
)
from .geometry import Placement, SurfaceGeometry, partition_surface, spacing_violations
from .harness import (
    ExperimentConfig,
    ResultRecord,
    TrialRecord,
    dbm_to_watts,
    emit_results,
    load_results,
    run_sweep,
    run_trial,
    wavelength,
)
from .pso import PsoConfig, SwarmState, brute_force_oracle, fitness, optimize
from .rate import RateReport, SplitConfig, aligned_rate, evaluate, optimal_phases, optimal_split, snr

__all__ = [
    "BaselineConfig",
    "ChannelRealization",
    "CorrelationModel",
    "ExperimentConfig",
    "LinkParams",
    "Placement",
    "PsoConfig",
    "RateReport",
    "ResultRecord",
    "SplitConfig",
    "SurfaceGeometry",
    "SwarmState",
    "TrialRecord",
    "aligned_rate",
    "brute_force_oracle",
    "channel_at",
    "correlated_nlos",
    "correlation_matrix",
    "dbm_to_watts",
    "emit_results",
    "evaluate",
    "evaluate_baseline",
    "fitness",
    "load_results",
    "optimal_phases",
    "optimal_split",
    "optimize",
    "partition_surface",
    "run_sweep",
    "run_trial",
    "snr",
    "spacing_violations",
    "star_ris_placement",
    "synthesize_channel",
    "wavelength",
]
