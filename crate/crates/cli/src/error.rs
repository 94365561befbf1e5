use thiserror::Error;

/// Failures reported by the command-line tool, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: unreadable files, malformed CSV or model files, invalid options.
    #[error("{0}")]
    Validation(String),
    /// A numerical routine failed on otherwise valid input.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<rvine_core::Error> for CliError {
    fn from(e: rvine_core::Error) -> Self {
        // identical models leave the Vuong statistic undefined: the input is
        // well-formed, the computation is not
        let numerical = e.is_numerical() || matches!(e, rvine_core::Error::IllPosed(_));
        if numerical {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
