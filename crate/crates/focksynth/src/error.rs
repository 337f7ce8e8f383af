use thiserror::Error;

/// Errors shared across the synthesizer crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("transmissivity must lie in (0, 1], got {0}")]
    InvalidTau(f64),

    #[error("quantum efficiency must lie in (0, 1], got {0}")]
    InvalidEta(f64),

    #[error("parameter {0} must be finite")]
    NonFinite(&'static str),

    #[error("click probability {0:.3e} is too small to condition on")]
    NoClickProbability(f64),

    #[error("no photon number is resonant below the truncation")]
    NoResonance,

    #[error("target probability {target} outside attainable range [{lo:.6e}, {hi:.6e}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("click probability is not monotone in tau over the bracket")]
    NonMonotoneBracket,

    #[error("equal-weight amplitude needs two distinct photon numbers, got {0} twice")]
    EqualPhotonNumbers(usize),

    #[error("cavity-mode truncation too small: trace deficit {0:.3e}")]
    TruncationTooSmall(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid sweep specification: {0}")]
    InvalidSweep(String),

    #[error("incompatible superposition design: {0}")]
    IncompatibleDesign(String),
}
