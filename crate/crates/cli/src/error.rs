use hck_core::witness::WitnessTrace;
use hck_core::Error;

/// Exit codes are part of the command-line contract.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const DEGENERATE: i32 = 3;
    pub const BREAKDOWN: i32 = 4;
    pub const SLATER: i32 = 5;
    pub const UNDECIDED: i32 = 6;
    pub const CONVEXITY_FAILURE: i32 = 7;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => exit::VALIDATION,
            CliError::Core(e) => match e {
                Error::DegenerateLine | Error::DegenerateCone { .. } => exit::DEGENERATE,
                Error::NumericalBreakdown { .. }
                | Error::InternalNumerics(_)
                | Error::LemmaViolated(_)
                | Error::NotOnImage(_)
                | Error::NoRealRoot(_)
                | Error::IdenticallyZero => exit::BREAKDOWN,
                Error::SlaterViolated { .. } => exit::SLATER,
                Error::DimensionMismatch { .. }
                | Error::InvalidArgument(_)
                | Error::PreconditionViolated(_)
                | Error::ZeroConic
                | Error::NotAParabola(_)
                | Error::InconsistentSystem { .. }
                | Error::DimensionTooLarge(_) => exit::VALIDATION,
            },
        }
    }

    pub fn trace(&self) -> Option<&WitnessTrace> {
        match self {
            CliError::Core(Error::NumericalBreakdown { trace, .. }) => Some(trace),
            _ => None,
        }
    }
}
