use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error("numerical error: {0}")]
    Numeric(#[from] ofdmcr_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: 1 config, 2 numeric or tolerance, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Tolerance(_) | CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
