use std::path::PathBuf;

use hystcmp_core::analyses::AnalysisError;
use hystcmp_core::analytics::AnalyticsError;
use hystcmp_core::comparator::BuildError;
use hystcmp_core::mna::SolveError;
use hystcmp_core::netlist::NetlistError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        source: NetlistError,
    },
    #[error("{0}")]
    Build(#[from] BuildError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Analytics(#[from] AnalyticsError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solve(_) | CliError::Analysis(_) | CliError::Analytics(_) => 1,
            CliError::Io { .. } | CliError::Usage(_) | CliError::Build(_) => 2,
            CliError::Parse { .. } => 3,
        }
    }
}
