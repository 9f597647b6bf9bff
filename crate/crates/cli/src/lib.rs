//! Command-line front end for `areamatch`.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;

use areamatch::Error;

pub use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MATCH_FAILED: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. }
        | Error::Format { .. }
        | Error::EmptyMap
        | Error::EmptyGraph
        | Error::InvalidGeometry(_)
        | Error::DegeneratePolygon(_) => EXIT_INPUT,
        Error::MatchFailed(_) | Error::NoHypotheses => EXIT_MATCH_FAILED,
        Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
    }
}

pub fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))?;
    }
    let file = config::FileConfig::from_env()?;
    commands::dispatch(cli.command, &file)
}
