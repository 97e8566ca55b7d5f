use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] coexist_core::Error),

    #[error("unknown experiment kind `{0}`")]
    UnknownKind(String),

    #[error("unknown {what} `{value}`")]
    UnknownName { what: &'static str, value: String },

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("{0} invariant check(s) failed")]
    Validation(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
