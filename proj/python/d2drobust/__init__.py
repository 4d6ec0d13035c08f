"""Robust D2D power allocation with learned uncertainty sets."""

from ._core import (
    AllocationResult,
    ConfigError,
    DatasetError,
    Error,
    NumericalFailure,
    Scenario,
    ScenarioConfig,
    SvcModel,
    SymmetricSet,
    UncertaintySet,
    allocate,
    build_scenario,
    calibrate,
    effective_config,
    fit_quantile_svc,
    fit_set,
    fit_svc,
    generate_dataset,
    pc_max_robust,
    run_experiment,
    sinr_c,
    throughput,
)

__all__ = [
    "AllocationResult",
    "ConfigError",
    "DatasetError",
    "Error",
    "NumericalFailure",
    "Scenario",
    "ScenarioConfig",
    "SvcModel",
    "SymmetricSet",
    "UncertaintySet",
    "allocate",
    "build_scenario",
    "calibrate",
    "effective_config",
    "fit_quantile_svc",
    "fit_set",
    "fit_svc",
    "generate_dataset",
    "pc_max_robust",
    "run_experiment",
    "sinr_c",
    "throughput",
]
