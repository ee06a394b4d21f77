use thiserror::Error;

/// Failures raised by the model, solvers and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("negative radicand {value:e} in {which}")]
    RadicandNegative { which: &'static str, value: f64 },

    #[error("closed-form coefficients are ill-conditioned for level {level}: {reason}")]
    DegenerateCoefficients { level: u8, reason: &'static str },

    #[error("spectrum is degenerate (minimum gap {min_gap:e})")]
    DegenerateSpectrum { min_gap: f64 },

    #[error("state vector has norm {norm} (expected 1)")]
    NonNormalizedInput { norm: f64 },

    #[error("derivative leaves the support of the state (|<i|dρ|k>| = {magnitude:e})")]
    ZeroSupportDerivative { magnitude: f64 },

    #[error("integration step too coarse: single-step norm drift {drift:e}")]
    StepTooCoarse { drift: f64 },

    #[error("rotation too fast for adiabatic following: margin {margin:e} < target {target}")]
    NotAdiabatic { margin: f64, target: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
