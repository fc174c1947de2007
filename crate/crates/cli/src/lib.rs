//! Command-line front end for the `benjamin-core` solver: configuration
//! parsing, run orchestration and deterministic output files.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigDocument, ConfigError, RunConfig};
pub use run::{execute, Command, Invocation, RunManifest};
