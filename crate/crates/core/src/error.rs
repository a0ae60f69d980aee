use thiserror::Error;

/// Errors raised by the time-frequency operator toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TfError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error(
        "Gabor system is not a frame: smallest eigenvalue {smallest_eigenvalue:e}, \
         condition number {condition:e}"
    )]
    FrameFailure { smallest_eigenvalue: f64, condition: f64 },

    #[error("Riesz property fails at quotient point ({}, {}): value {value:e}", point.0, point.1)]
    RieszFailure { point: (usize, usize), value: f64 },

    #[error("spreading support leaves the box at {} point(s), first {:?}", indices.len(), indices.first())]
    SupportViolation { indices: Vec<(usize, usize)> },

    #[error("prototype is not of multiplier form: relative residual {residual:e}")]
    NotMultiplierForm { residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TfError>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(TfError::DimensionMismatch { expected, found })
    }
}
