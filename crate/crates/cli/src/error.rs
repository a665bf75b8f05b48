use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 1 for anything the user can fix in the spec, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidSpec(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<mceif::Error> for CliError {
    fn from(e: mceif::Error) -> Self {
        match e {
            mceif::Error::InvalidConfig(_) | mceif::Error::DimensionMismatch { .. } => {
                CliError::InvalidSpec(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<mceif::dataset::DatasetError> for CliError {
    fn from(e: mceif::dataset::DatasetError) -> Self {
        CliError::Io(std::io::Error::other(e.to_string()))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
