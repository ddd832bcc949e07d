use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("{0} is not an odd prime")]
    NotOddPrime(i64),

    #[error("unsupported dimension {0}")]
    Dimension(usize),

    #[error("quadrature did not converge (relative change {change:e} for degree {degree})")]
    Quadrature { degree: usize, change: f64 },

    #[error("eigenbasis residual {residual:e} exceeds tolerance after {attempts} draws")]
    Eigenbasis { residual: f64, attempts: usize },

    #[error("first Kohnen coefficient A(1) vanishes")]
    VanishingFirstCoefficient,

    #[error("empty point set")]
    EmptyPointSet,

    #[error("degenerate regression: {0}")]
    DegenerateFit(String),

    #[error("malformed cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
