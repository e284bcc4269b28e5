use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: predacc::Error,
    },
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => 2,
            CliError::Model { source, .. } if source.is_numerical() => 3,
            CliError::Model { .. } => 2,
            CliError::Config { .. } => 4,
        }
    }

    pub fn model(context: impl Into<String>) -> impl FnOnce(predacc::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Model { context, source }
    }

    pub fn io(path: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
