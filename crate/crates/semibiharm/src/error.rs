//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid too small: need at least {need} nodes, got {got}")]
    GridTooSmall { need: usize, got: usize },
    #[error("derivative order {0} outside supported range 1..=4")]
    BadOrder(usize),
    #[error("accuracy {0} unsupported (use 2 or 4)")]
    BadAccuracy(usize),
    #[error("point is not on the unit sphere: |p| = {norm}")]
    NotOnSphere { norm: f64 },
    #[error("degenerate curve: vanishing speed at node {node}")]
    DegenerateCurve { node: usize },
    #[error("coupling has delta2 = 0 but a fourth-order term is required")]
    ZeroDelta2,
    #[error("family not applicable: {0}")]
    FamilyInapplicable(String),
    #[error("parameter constraint violated: {0}")]
    ParameterConstraint(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("field length {got} does not match grid length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("range error: {0}")]
    Range(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
