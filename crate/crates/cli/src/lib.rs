//! Batch front end: JSON config in, CSV rows plus a JSON metadata record out.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{load_config, parse_config, JobConfig, Kind, Mode};
pub use run::{run, Outcome, RunArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toolkit(#[from] cohsyn::Error),
}

impl CliError {
    /// 1 for anything the user can fix in the config or on disk, 2 when the
    /// problem itself could not be decided.
    pub fn exit_code(&self) -> u8 {
        use cohsyn::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv(_) => 1,
            CliError::Toolkit(
                E::InvalidModel(_)
                | E::DimensionMismatch(_)
                | E::NotSymmetric(_)
                | E::NonRealDrift(_),
            ) => 1,
            CliError::Toolkit(_) => 2,
        }
    }
}
