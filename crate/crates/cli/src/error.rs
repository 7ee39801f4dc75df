use std::fmt;
use std::process::ExitCode;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad config or arguments: exit 1.
    Validation(String),
    /// Filesystem or other runtime failure: exit 2.
    Io(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(1),
            CliError::Io(_) => ExitCode::from(2),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "invalid configuration:\n{msg}"),
            CliError::Io(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<ra_sim_core::engine::EngineError> for CliError {
    fn from(e: ra_sim_core::engine::EngineError) -> Self {
        use ra_sim_core::engine::EngineError;
        match e {
            EngineError::Config(issues) => {
                CliError::Validation(issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n"))
            }
            EngineError::Model(m) => CliError::Io(anyhow::anyhow!("simulation failed: {m}")),
        }
    }
}
