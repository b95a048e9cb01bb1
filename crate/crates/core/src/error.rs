use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {}", .0.join("; "))]
    InvalidProblem(Vec<String>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("subsolver failed in {step} (block {block:?}): {reason}")]
    Subsolver {
        step: &'static str,
        block: Option<usize>,
        reason: String,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("negative cut modulus {0}")]
    NegativeModulus(f64),

    #[error("penalty decrease from {from} to {to} is not supported by cut revalidation")]
    PenaltyDecrease { from: f64, to: f64 },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("bad parameter: {0}")]
    Parameter(String),

    #[error("external solver: {0}")]
    External(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
