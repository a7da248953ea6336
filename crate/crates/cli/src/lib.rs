//! Command-line surface over the core numerics: validated run
//! configurations, named presets, invariant suites, and artifact writing
//! with reproducible headers.

pub mod cli;
pub mod config;
pub mod presets;
pub mod run;
pub mod verify;

pub use cli::cli_main;
pub use config::{parse_config, RunConfig};
pub use presets::preset;
pub use run::{execute, CliError, RunOutput, VERSION};
pub use verify::{grid_500, run_suite, SuiteReport};
