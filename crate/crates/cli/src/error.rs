use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<qcldpc::Error> for CliError {
    fn from(e: qcldpc::Error) -> Self {
        match e {
            qcldpc::Error::InvalidParameter(m) => CliError::Usage(m),
            qcldpc::Error::Io(io) => CliError::Io(io),
            other @ (qcldpc::Error::Parse { .. } | qcldpc::Error::Validation(_)) => {
                CliError::Validation(other.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
