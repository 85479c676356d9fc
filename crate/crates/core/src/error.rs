use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("eigensolver did not converge: attained residual {attained:.3e}, target {target:.3e}")]
    NonConvergence { attained: f64, target: f64 },
    #[error("fit requires >= {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("numerical overflow: {0}")]
    Overflow(String),
    #[error("empty sample set: {0}")]
    EmptySampleSet(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
