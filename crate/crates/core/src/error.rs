use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector is not on the unit sphere (norm = {norm})")]
    NotOnSphere { norm: f64 },

    #[error("vector lies outside the closed unit ball (norm = {norm})")]
    OutsideBall { norm: f64 },

    #[error("the zero vector cannot be normalized")]
    ZeroVector,

    #[error("the space with exponent p = {p} is not uniformly convex")]
    NotUniformlyConvex { p: String },

    #[error("operation requires a Hilbert (p = 2) space, got p = {p}")]
    NotHilbert { p: String },

    #[error("dimension {dim} is too large for exhaustive search (max {max})")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("attainment could not be verified after {retries} attempts")]
    AttainmentUnverified { retries: usize },

    #[error("iteration aborted at step {step}: {reason}")]
    NonConvergent { step: usize, reason: String },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Errors caused by bad input rather than by a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotOnSphere { .. }
                | Error::OutsideBall { .. }
                | Error::ZeroVector
                | Error::NotUniformlyConvex { .. }
                | Error::NotHilbert { .. }
                | Error::DimensionTooLarge { .. }
                | Error::LengthMismatch(_)
                | Error::EmptyInput(_)
                | Error::InvalidArgument(_)
                | Error::PreconditionFailed(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
