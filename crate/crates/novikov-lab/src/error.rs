use thiserror::Error;

use crate::grid::GridSpec;

/// Errors raised by the grid / transform / multiplier layer.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("domain length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("grid size must be a power of two >= 16, got {0}")]
    BadPointCount(usize),
    #[error("expected {expected} values for this grid, got {got}")]
    SampleCountMismatch { expected: usize, got: usize },
    #[error("operands live on different grids ({0} vs {1})")]
    GridMismatch(GridSpec, GridSpec),
    #[error("inverse transform left relative imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),
    #[error("Lp exponent must satisfy p >= 1, got {0}")]
    BadExponent(f64),
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
}
