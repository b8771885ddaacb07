//! Experiment runner for the `almost-thermal` model: configuration,
//! seeded execution and CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod run;
pub mod table;

pub use config::{Experiment, ExperimentConfig, OutputFormat};
pub use error::CliError;
pub use run::{execute, RunManifest};
pub use table::Table;
