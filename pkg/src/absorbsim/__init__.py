"""Monte Carlo simulation of diffusing molecules hitting an absorbing sphere.

A point source releases N molecules at the origin; a fully absorbing
spherical receiver sits a fixed distance away. Four per-step absorption
criteria (smc, sc, rmc, apmc) are simulated against the closed-form absorbed
fraction. See README.md for the CLI and the CSV schemas.
"""
from .core import (
    Algorithm,
    ConfigError,
    DistributionResult,
    MoleculeState,
    MoleculeStatus,
    ReceiverGeometry,
    SimulationConfig,
    TimeSeriesResult,
    config_from_dict,
    config_to_dict,
    load_config,
    save_config,
    validate,
)
from .engine import (
    ResampleExhaustedError,
    TrialState,
    apmc_resample,
    brownian_step,
    decide_apmc_pre,
    decide_rmc,
    decide_sc,
    decide_smc,
    new_trial_state,
    run_step,
    run_trial,
    run_trials,
)
from .kernels import (
    absorbed_fraction,
    erfc,
    expected_new_absorptions,
    planar_crossing_prob,
    segment_intersects_sphere,
    step_absorption_prob,
)
from .streams import RandomStream, StreamBundle, make_stream

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "ConfigError",
    "DistributionResult",
    "MoleculeState",
    "MoleculeStatus",
    "RandomStream",
    "ReceiverGeometry",
    "ResampleExhaustedError",
    "SimulationConfig",
    "StreamBundle",
    "TimeSeriesResult",
    "TrialState",
    "absorbed_fraction",
    "apmc_resample",
    "brownian_step",
    "config_from_dict",
    "config_to_dict",
    "decide_apmc_pre",
    "decide_rmc",
    "decide_sc",
    "decide_smc",
    "erfc",
    "expected_new_absorptions",
    "load_config",
    "make_stream",
    "new_trial_state",
    "planar_crossing_prob",
    "run_step",
    "run_trial",
    "run_trials",
    "save_config",
    "segment_intersects_sphere",
    "step_absorption_prob",
    "validate",
]
