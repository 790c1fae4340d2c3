//! Scenario files, seeded initial conditions and run outputs for the
//! hierarchical fuzzy opinion engines in `hfon-core`.
//!
//! A scenario is a TOML document (see [`scenario::ScenarioConfig`]). Running
//! one produces a full-resolution [`TrajectoryRecord`](hfon_core::TrajectoryRecord)
//! and a [`Summary`] with consensus times, predictor checks and cluster
//! reports; [`output`] writes both to disk.

pub mod commands;
pub mod error;
pub mod initials;
pub mod output;
pub mod run;
pub mod scenario;

pub use commands::{clusters_command, predict_command, run_command, ConsensusInputs, FrameClusters, Prediction, RunReport};
pub use error::{CliError, Result};
pub use initials::seeded_initials;
pub use output::{read_trajectory, write_outputs, write_trajectory};
pub use run::{run_scenario, ConsensusSummary, Overrides, PhaseClusterSummary, PredictorCheck, RunOutput, StepsToTarget, Summary};
pub use scenario::{builtin, load_scenario, parse_scenario, InitialSpec, Kind, ScenarioConfig, BUILTINS};
