use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

impl From<rsft::Error> for CliError {
    fn from(e: rsft::Error) -> Self {
        match e {
            rsft::Error::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            rsft::Error::InvalidParameter { .. }
            | rsft::Error::LengthMismatch { .. }
            | rsft::Error::ShapeMismatch { .. }
            | rsft::Error::NonInvertible { .. }
            | rsft::Error::Ambiguous { .. } => CliError::Config(e.to_string()),
            rsft::Error::NoSolution { .. } => CliError::Other(e.to_string()),
        }
    }
}
