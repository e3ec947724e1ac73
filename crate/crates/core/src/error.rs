use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mask is {width}x{height}, both dimensions must be at least 3")]
    TooSmall { width: usize, height: usize },
    #[error("inside node ({x}, {y}) lies on the image border")]
    MaskTouchesBorder { x: usize, y: usize },
    #[error("mask has no inside node")]
    EmptyMask,
    #[error("mask data has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fields are defined on different masks")]
    MaskMismatch,
    #[error("lambda must exceed 1 for blend weights, got {0}")]
    BadLambda(f64),
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("soft-min denominator vanished")]
    DegenerateSum,
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("row {row} contains no inside node")]
    EmptySlice { row: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape does not fit the canvas with a one-pixel margin: {0}")]
    DoesNotFit(String),
}
