//! Command-line runs of the double-layer library: configs in, CSV/JSON and
//! gnuplot scripts out.

pub mod commands;
pub mod config;
pub mod output;

use double_layer::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] double_layer::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 2 config, 3 domain, 4 numerical, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Domain => 3,
                ErrorKind::Numerical => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}
