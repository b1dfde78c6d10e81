use thiserror::Error;

/// Errors produced by the decomposition and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmdError {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid spline knots: {0}")]
    InvalidKnots(String),

    /// The signal has too few extrema for upper/lower envelopes; callers
    /// treat it as the final residue.
    #[error("signal has too few extrema to build envelopes")]
    NoEnvelope,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("components are linearly dependent: input {index} has no energy left after orthogonalization")]
    RankDeficient { index: usize },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("mean period undefined: component has no zero crossings")]
    PeriodUndefined,

    #[error("sample rate {0} Hz aliases the 50 Hz content; it must exceed 100 Hz")]
    Aliasing(f64),
}

pub type Result<T> = std::result::Result<T, EmdError>;
