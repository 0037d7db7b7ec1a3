use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency {omega} lies outside the declared window [{min}, {max}]")]
    OutOfWindow { omega: f64, min: f64, max: f64 },

    #[error("f(ω) = ω n₁(ω) is not increasing at ω = {omega} (f′ = {slope})")]
    NonMonotone { omega: f64, slope: f64 },

    #[error("phase integral not converged: 2x and 4x refined Simpson differ by {rel_diff:e} (relative)")]
    GridTooCoarse { rel_diff: f64 },

    #[error("second derivatives unavailable: {0}")]
    DerivativeUnavailable(String),

    #[error("eigensolver did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("√λ = {target} is outside f(window) = [{lo}, {hi}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("magnetic-field reconstruction needs at least 2 time samples, got {samples}")]
    InsufficientHistory { samples: usize },

    #[error("medium profiles are not homogeneous")]
    NotHomogeneous,

    #[error("ω = {omega} is within the exclusion radius {radius} of the resonance (|k − K(ω)| = {detuning})")]
    ResonanceProximity { omega: f64, detuning: f64, radius: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
