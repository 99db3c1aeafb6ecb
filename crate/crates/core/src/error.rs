use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("degree {degree} exceeds ambient dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },

    #[error("operation needs degree at least {needed}, got {degree}")]
    DegreeUnderflow { degree: usize, needed: usize },

    #[error("ambient dimension {0} is outside the supported range 1..=16")]
    UnsupportedDimension(usize),

    #[error("quaternionic dimension n = {0} is outside the supported range 1..=4")]
    UnsupportedQuaternionicDimension(usize),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("form is not of pure type ({p},{q}): residual {residual:.3e}")]
    NotPureType { p: usize, q: usize, residual: f64 },

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),

    #[error("ill-conditioned rank decision: gap ratio {ratio:.3e}")]
    RankGap { ratio: f64 },
}
