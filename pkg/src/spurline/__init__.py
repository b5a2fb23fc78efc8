"""Behavioral RF signal-chain simulator and frequency-planning toolkit.

Tone-domain simulation of an up/down-conversion chain (doubler leveling,
mixer spur tables, LO breakthrough, filter shaping, amplifier
intermodulation), analysis fits (IP3, EVM budgets, leveling threshold),
exact-integer frequency planning with degeneracy and sampler-alias
checks, and Touchstone-based antenna-coupling ingestion with 2x2
channel conditioning.
"""

from .analysis import (
    BELOW_FLOOR,
    DegenerateFit,
    EvmBudget,
    InsufficientPoints,
    Ip3Fit,
    detect_leveling_threshold,
    evm_from_spurs,
    fit_ip3,
    lo_breakthrough_report,
    make_evm_budget,
)
from .chainconfig import (
    ChainWarning,
    parse_chain_config,
    parse_frequency,
    serialize_chain,
    validate_chain,
)
from .components import (
    AmplifierSpec,
    AttenuatorSpec,
    Chain,
    DoublerSpec,
    FilterSpec,
    MixerSpec,
    SourceSpec,
    Stage,
)
from .engine import (
    PropagationResult,
    SweepResult,
    propagate,
    run_two_tone_sweep,
    spectrum_to_csv,
    two_tone_stimulus,
)
from .errors import ConfigError, ConfigSyntaxError, InvariantViolation, SpurlineError
from .kernels import BACKEND as KERNEL_BACKEND
from .mimo import (
    ChannelMatrix2x2,
    CouplingDataset,
    CouplingRecord,
    build_channel_matrix,
    coupling_at,
    coupling_report_csv,
    load_coupling_dataset,
)
from .planner import (
    EmptyGrid,
    FreqPlan,
    PlanConstraints,
    SpurReport,
    alias_frequency,
    check_sampler_collisions,
    enumerate_rx_spurs,
    parse_plan_config,
    search_plans,
)
from .touchstone import (
    OutOfRange,
    TwoPortSParams,
    parse_touchstone,
    serialize_touchstone,
)
from .units import (
    DEFAULT_FLOOR_DBM,
    OriginSignature,
    Spectrum,
    SummationMode,
    Tone,
    bin_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "AmplifierSpec",
    "AttenuatorSpec",
    "BELOW_FLOOR",
    "Chain",
    "ChainWarning",
    "ChannelMatrix2x2",
    "ConfigError",
    "ConfigSyntaxError",
    "CouplingDataset",
    "CouplingRecord",
    "DEFAULT_FLOOR_DBM",
    "DegenerateFit",
    "DoublerSpec",
    "EmptyGrid",
    "EvmBudget",
    "FilterSpec",
    "FreqPlan",
    "InsufficientPoints",
    "InvariantViolation",
    "Ip3Fit",
    "KERNEL_BACKEND",
    "MixerSpec",
    "OriginSignature",
    "OutOfRange",
    "PlanConstraints",
    "PropagationResult",
    "SourceSpec",
    "Spectrum",
    "SpurReport",
    "SpurlineError",
    "Stage",
    "SummationMode",
    "SweepResult",
    "Tone",
    "TwoPortSParams",
    "alias_frequency",
    "bin_spectrum",
    "build_channel_matrix",
    "check_sampler_collisions",
    "coupling_at",
    "coupling_report_csv",
    "detect_leveling_threshold",
    "enumerate_rx_spurs",
    "evm_from_spurs",
    "fit_ip3",
    "lo_breakthrough_report",
    "load_coupling_dataset",
    "make_evm_budget",
    "parse_chain_config",
    "parse_frequency",
    "parse_plan_config",
    "parse_touchstone",
    "propagate",
    "run_two_tone_sweep",
    "search_plans",
    "serialize_chain",
    "serialize_touchstone",
    "spectrum_to_csv",
    "two_tone_stimulus",
    "validate_chain",
]
