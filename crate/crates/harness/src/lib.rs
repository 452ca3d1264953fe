//! Experiment driver for the `linproj` integrators: named presets,
//! trajectories, order and equivalence studies, CSV output and the CLI.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod output;
pub mod presets;

pub use error::HarnessError;
pub use experiment::{
    equivalence_study, fit_slope, integral_error_study, order_study, reference_state, run_trajectory, step_size,
    EquivalenceSeries, OrderStudyRow, TrajectoryFailure, TrajectoryRecord,
};
pub use presets::{default_integrals, parse_integrals, preset, Preset, PRESET_NAMES};
