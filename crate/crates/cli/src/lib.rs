//! Library side of the `dickecool` command: config parsing, sweep execution
//! and file output.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::RunConfig;
pub use error::CliError;
pub use runner::{run, RunMetadata, RunOptions};

/// Environment variable capping the operator dimension of a run.
pub const MAX_DIM_ENV: &str = "DICKECOOL_MAX_DIM";

/// Parses the dimension cap from the environment, if set.
pub fn max_dim_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(MAX_DIM_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{MAX_DIM_ENV} must be a positive integer, got {v:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Usage(format!("{MAX_DIM_ENV}: {e}"))),
    }
}
