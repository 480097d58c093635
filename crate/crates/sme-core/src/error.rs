use thiserror::Error;

#[derive(Debug, Error)]
pub enum SmeError {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("row {row} has an empty feasible region (contradictory data or w bound below the residual scale)")]
    InfeasibleRow { row: usize },
    #[error("row {row} is unbounded")]
    UnboundedRow { row: usize },
    #[error("lp solver failure: {0}")]
    Lp(#[from] crate::lp::LpError),
    #[error("serialization failure: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
