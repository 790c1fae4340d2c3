use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The scenario or command line is unusable; nothing was run.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Engine(#[from] hfon_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub(crate) fn config(key: &str, msg: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{key}: {msg}"))
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
