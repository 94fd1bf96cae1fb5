use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<nanophonon::Error> for CliError {
    fn from(e: nanophonon::Error) -> Self {
        match e {
            nanophonon::Error::Config { line: 0, message } => {
                CliError::Config(format!("command-line override: {message}"))
            }
            nanophonon::Error::Config { line, message } => CliError::Config(format!("line {line}: {message}")),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
