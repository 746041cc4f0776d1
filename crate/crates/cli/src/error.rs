use spdc_core::SpdcError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Solver { context: String, source: SpdcError },
    #[error(transparent)]
    Core(#[from] SpdcError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn at(context: impl Into<String>, source: SpdcError) -> Self {
        CliError::Solver {
            context: context.into(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for solver failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver { source, .. } | CliError::Core(source) => {
                if source.is_solver_failure() {
                    3
                } else {
                    2
                }
            }
            CliError::Io(_) | CliError::Json(_) => 1,
        }
    }
}
