use thiserror::Error;

/// Errors produced by the numerical core and the data-handling layer.
#[derive(Debug, Error)]
pub enum FgsError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("node {index} lies outside the admissible domain: {detail}")]
    Range { index: usize, detail: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("ill-conditioned system: {0}")]
    Conditioning(String),

    #[error(
        "computed degree {value:e} at node {index} is not positive; \
         increase N or m (or the kernel scale) so that the fast summation error stays below the minimum degree"
    )]
    DegreePositivity { index: usize, value: f64 },

    #[error("operator is not positive definite (p^T A p = {curvature:e} at iteration {iteration})")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("iteration diverged after {steps} steps")]
    Divergence { steps: usize },

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("unsupported format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FgsError>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(FgsError::Shape { expected, got });
    }
    Ok(())
}
