use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error("no data inside market hours for {0}")]
    EmptySeries(String),

    #[error("no exceedances above threshold {threshold}")]
    NoExceedances { threshold: f64 },

    #[error("estimator undefined for this sample: {0}")]
    Undefined(String),

    #[error("likelihood undefined: {0}")]
    Support(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: {malformed} of {rows} rows malformed (more than 1%), check the column schema")]
    Schema { path: String, rows: usize, malformed: usize },
}
