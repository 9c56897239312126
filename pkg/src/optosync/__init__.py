"""Synchronization and entanglement of two coupled optomechanical
cavities under a modulated drive: mean-field limit cycles, Gaussian
fluctuation covariances, and the diagnostics built on them."""

from .errors import (
    ConfigError,
    ConfigSyntaxError,
    ConflictingSource,
    DegenerateVariance,
    Diverged,
    InvalidParams,
    NegativeOccupation,
    NonFinite,
    NonPositiveRate,
    NumericalError,
    OptosyncError,
    PhysicalityLost,
    SinkUnavailable,
    StepUnderflow,
    UnknownAxis,
    UnknownKey,
    ValidationError,
    WindowTooShort,
)
from .params import SystemParams, Violation, validate_params
from .model import (
    OMEGA,
    DriftMatrix,
    MeanFieldState,
    default_initial_conditions,
    diffusion_matrix,
    drift_matrix,
    joint_rhs,
    mean_field_rhs,
    pack_covariance,
    pack_joint,
    unpack_covariance,
    unpack_joint,
)
from .integrate import (
    IntegratorConfig,
    Trajectory,
    adaptive_step,
    propagate,
    rk4_step,
    validate_integrator,
)
from .measures import (
    EprVariances,
    Metrics,
    MetricsSeries,
    classical_errors,
    entanglement_product,
    epr_variances,
    metrics_at,
    metrics_series,
    physicality_check,
    steady_state_window,
    sync_quantum,
    window_average,
)
from .experiments import (
    PRESETS,
    SWEEP_AXES,
    OracleReport,
    Preset,
    RunResult,
    SweepResult,
    SweepRow,
    apply_axis,
    ensemble_covariance,
    get_preset,
    loss_threshold,
    run_preset,
    stochastic_oracle,
    sweep_axis,
    sweep_thermal,
)
from .config import RunConfig, format_config, parse_config
from .output import emit_summary, emit_sweep, emit_timeseries

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConfigSyntaxError",
    "ConflictingSource",
    "DegenerateVariance",
    "Diverged",
    "InvalidParams",
    "NegativeOccupation",
    "NonFinite",
    "NonPositiveRate",
    "NumericalError",
    "OptosyncError",
    "PhysicalityLost",
    "SinkUnavailable",
    "StepUnderflow",
    "UnknownAxis",
    "UnknownKey",
    "ValidationError",
    "WindowTooShort",
    "SystemParams",
    "Violation",
    "validate_params",
    "OMEGA",
    "DriftMatrix",
    "MeanFieldState",
    "default_initial_conditions",
    "diffusion_matrix",
    "drift_matrix",
    "joint_rhs",
    "mean_field_rhs",
    "pack_covariance",
    "pack_joint",
    "unpack_covariance",
    "unpack_joint",
    "IntegratorConfig",
    "Trajectory",
    "adaptive_step",
    "propagate",
    "rk4_step",
    "validate_integrator",
    "EprVariances",
    "Metrics",
    "MetricsSeries",
    "classical_errors",
    "entanglement_product",
    "epr_variances",
    "metrics_at",
    "metrics_series",
    "physicality_check",
    "steady_state_window",
    "sync_quantum",
    "window_average",
    "PRESETS",
    "SWEEP_AXES",
    "OracleReport",
    "Preset",
    "RunResult",
    "SweepResult",
    "SweepRow",
    "apply_axis",
    "ensemble_covariance",
    "get_preset",
    "loss_threshold",
    "run_preset",
    "stochastic_oracle",
    "sweep_axis",
    "sweep_thermal",
    "RunConfig",
    "format_config",
    "parse_config",
    "emit_summary",
    "emit_sweep",
    "emit_timeseries",
]
