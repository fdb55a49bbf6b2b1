//! Command line, run configuration, artifact files and experiment suites
//! around `hubbard-adapt-core`.
//!
//! A run is described by a TOML document (see [`config::RunConfig`]), executed
//! in memory by [`run::run_task`], and written to disk by
//! [`output::Artifacts::commit`], which stages files in a temp directory and
//! renames it into place.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod suite;

pub use config::{parse_config, RunConfig, Task};
pub use error::RunError;
pub use output::Artifacts;
pub use run::{run_task, RunOutput};
pub use suite::{run_suite, SuiteName, SuiteReport};
