//! Front-end library for the nematic dynamics laboratory: configuration
//! parsing, experiment orchestration, artifact export, and the cross-tier
//! validation suite. The `nematic` binary is a thin dispatcher over this.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod tables;
pub mod validate;

pub use config::{parse_config, serialize_config, ExperimentConfig, Tier};
pub use experiment::{run_simulation, RunOutcome, StageError};
