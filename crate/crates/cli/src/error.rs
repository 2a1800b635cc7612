use vimbench_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Layout(#[source] CoreError),

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Layout(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::MissingProvenance(_) => CliError::Validation(e.to_string()),
            CoreError::InvalidCost(_) => CliError::Internal(e.to_string()),
            e => CliError::Layout(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
