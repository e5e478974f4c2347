use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value handed to a constructor or operation is outside its domain.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("degenerate allocation problem: every gain is zero but the budget is positive")]
    DegenerateProblem,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("pattern index {k} out of range 1..={max}")]
    PatternOutOfRange { k: u64, max: u64 },

    #[error("exact enumeration of 2^{n_s} patterns exceeds the cap of {cap}")]
    EnumerationCapExceeded { n_s: usize, cap: u64 },

    #[error("threshold prediction ({predicted}) disagrees with waterfill concentration ({observed})")]
    ConcentrationMismatch { predicted: bool, observed: bool },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
