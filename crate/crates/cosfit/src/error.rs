use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("signal length must be at least 2, got {0}")]
    SignalTooShort(usize),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid point set: {0}")]
    InvalidPoints(String),

    #[error("weights must be positive")]
    NonPositiveWeight,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degree {degree} requires more than {samples} samples")]
    DegreeTooLarge { degree: usize, samples: usize },

    #[error("operator is not positive definite (p'Ap = {0:e} <= 0)")]
    IndefiniteOperator(f64),

    #[error("operator callbacks are not adjoint-consistent (|<Vx,y> - <x,V'y>| = {0:e})")]
    AdjointMismatch(f64),

    #[error("grid shapes do not match: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("reference field has zero norm")]
    ZeroReference,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("duplicate sampling location {0} (enable merging to average duplicates)")]
    DuplicatePoint(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::DegreeTooLarge { .. } => 1,
            Error::Parse { .. }
            | Error::Io(_)
            | Error::DuplicatePoint(_)
            | Error::InvalidPoints(_)
            | Error::NonPositiveWeight
            | Error::LengthMismatch { .. }
            | Error::GridMismatch(..)
            | Error::ZeroReference
            | Error::SignalTooShort(_)
            | Error::NonFinite(_) => 2,
            Error::IndefiniteOperator(_) | Error::AdjointMismatch(_) => 3,
        }
    }
}
