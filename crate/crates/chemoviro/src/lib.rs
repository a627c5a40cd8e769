//! Dynamics toolkit for a tumour treated with an oncolytic virus and a
//! cytotoxic drug, with innate immune responses against both tumour cells and
//! virus-infected cells.
//!
//! The crate provides, in dependency order:
//!
//! | module | contents |
//! |---|---|
//! | [`params`] | parameter set, validation, key-based access |
//! | [`state`] | system state and invariant-region diagnostics |
//! | [`model`] | right-hand sides of the full model and its sub-models |
//! | [`dynamics`] | fixed-step integration, steady-state runs, trajectories |
//! | [`equilibria`] | closed-form and Newton equilibria, stability verdicts |
//! | [`reproduction`] | basic reproduction number, elasticities, equilibrium sensitivities |
//! | [`control`] | optimal dosing via a forward-backward sweep |
//! | [`config`] | scenario files: flat `key = value` text with sections |
//! | [`plot`] | deterministic SVG line charts |
//! | [`cli`] | batch subcommands over scenario files, CSV and SVG outputs |
//!
//! Start with the `examples/` directory: each example exercises one
//! capability end to end and writes its outputs to a scratch directory.

pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod equilibria;
pub mod model;
pub mod output;
pub mod params;
pub mod plot;
pub mod reproduction;
pub mod state;

pub use cli::{execute, CliError, RunOptions};
pub use config::{ConfigError, Scenario, ScenarioConfig, VariantChoice};
pub use control::{
    adjoint_rhs, forward_backward_sweep, hamiltonian, objective, optimal_controls_from_adjoint,
    AdjointState, ControlError, ControlGrid, OCSolution, SweepOptions, SweepStep,
};
pub use dynamics::{
    integrate_rk4, integrate_to_steady_state, DomainEvent, DynamicsError, SteadyStateOptions,
    SteadyStateOutcome, Trajectory,
};
pub use equilibria::{
    chemo_dose_threshold, chemo_equilibria, equilibria_for, full_endemic_equilibrium,
    full_equilibria, no_treatment_equilibria, viro_equilibria, DoseThreshold, EquilibriaError,
    EquilibriumKind, EquilibriumReport, EquilibriumSet, StabilityVerdict,
};
pub use model::{ControlSchedule, ModelError, ModelVariant};
pub use params::{ModelParameters, ParamError, PARAMETER_NAMES};
pub use plot::{line_chart, PlotError, Series};
pub use reproduction::{
    endemic_sensitivity, endemic_sensitivity_direct, next_generation_matrices, r0,
    r0_elasticities, r0_vs_dose_curve, DoseCurve, ElasticityTable, EndemicSensitivityReport,
    R0Report, ReproductionError, SensitivityMethod, SensitivityReport,
};
pub use state::{DomainCheck, OmegaViolation, SystemState, STATE_LABELS};
