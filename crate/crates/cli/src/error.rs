use roughflow::Error;

/// CLI failure split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or invalid configuration, or a strict-mode warning (exit 2).
    #[error("validation: {0}")]
    Validation(String),
    /// Failure while running or writing outputs (exit 1).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    /// Bad input versus failed computation.
    pub fn core(e: Error) -> CliError {
        match e {
            Error::EmptySet
            | Error::NotContained(_)
            | Error::Invalid(_)
            | Error::UnknownFamily(_)
            | Error::CirculationCount { .. }
            | Error::BadExponent(_)
            | Error::ExponentTooSmall(_)
            | Error::InsideObstacle(_)
            | Error::Json(_)
            | Error::Format(_) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }

    pub fn runtime(e: impl std::fmt::Display) -> CliError {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::core(e)
    }
}
