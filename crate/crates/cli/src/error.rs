use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget error: {0}")]
    Budget(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 config, 3 budget or window, 4 invariant, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<absum_core::Error> for CliError {
    fn from(e: absum_core::Error) -> Self {
        if e.is_budget() {
            CliError::Budget(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
