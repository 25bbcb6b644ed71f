//! Command-line front end: run a test on a data file, print the efficiency
//! table, run size/power simulations, and validate the samplers.

pub mod args;
pub mod commands;
pub mod csvio;
pub mod error;
pub mod report;
pub mod table;

pub use args::Cli;
pub use commands::{run, Status};
pub use error::{CliError, Result};

/// Environment variable holding the worker count; 0 or unset means one
/// worker per core.
pub const THREADS_ENV: &str = "HDSIGN_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`].
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}
