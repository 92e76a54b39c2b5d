use thiserror::Error;

use crate::witness::WitnessTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal numerics: {0}")]
    InternalNumerics(String),

    #[error("cone generators are linearly dependent (|det| = {det:e})")]
    DegenerateCone { det: f64 },

    #[error("conic has vanishing quadratic and linear parts")]
    ZeroConic,

    #[error("conic is not a parabola ({0})")]
    NotAParabola(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("the conic vanishes identically along the line")]
    IdenticallyZero,

    #[error("no root on either backward ray: {0}")]
    LemmaViolated(String),

    #[error("line endpoints coincide")]
    DegenerateLine,

    #[error("target is not on the line image: {0}")]
    NotOnImage(String),

    #[error("no real parameter reaches the target: {0}")]
    NoRealRoot(String),

    #[error("linear system is inconsistent (residual {residual:e})")]
    InconsistentSystem { residual: f64 },

    #[error("numerical breakdown: {reason}")]
    NumericalBreakdown {
        reason: String,
        trace: Box<WitnessTrace>,
    },

    #[error("no Slater point: g(x*) = {value:e} is not negative")]
    SlaterViolated { value: f64 },

    #[error("grid oracle supports n <= 3, got n = {0}")]
    DimensionTooLarge(usize),
}
