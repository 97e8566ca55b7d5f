use thiserror::Error;

/// Errors produced by the coexistence toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("dataset error at line {line}: {reason}")]
    DatasetRow { line: u64, reason: String },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("query out of map bounds for `{tx_id}` at ({x:.1}, {y:.1})")]
    OutOfBounds { tx_id: String, x: f64, y: f64 },

    #[error("unknown transmitter `{0}`")]
    UnknownTransmitter(String),

    #[error("least-squares fit is rank deficient: {0}")]
    RankDeficient(String),

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointDiverged { iterations: usize, residual: f64 },

    #[error("rate requirement {required} bits/s/Hz exceeds the achievable maximum {achievable} bits/s/Hz")]
    InfeasibleRate { required: f64, achievable: f64 },

    #[error("convex subproblem failed at iteration {iteration}: {reason}")]
    Subproblem { iteration: usize, reason: String },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("grid search limited to M_c + M_r <= 4, got {0}")]
    GridTooLarge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
