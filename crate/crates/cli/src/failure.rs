use std::process::ExitCode;

/// Why a command stopped. Each variant has its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// A check ran to completion and did not pass.
    #[error("{0}")]
    Validation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Validation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) | Failure::Output(_) => 3,
        })
    }

    /// Errors raised once computation has started.
    pub fn numerical(context: &str, e: impl std::fmt::Display) -> Self {
        Failure::Numerical(format!("{context}: {e}"))
    }
}
