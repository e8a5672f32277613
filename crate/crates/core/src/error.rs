use thiserror::Error;

/// Errors produced while building operators or propagating states.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("dissipative frame undefined: dephasing rate must be positive (got {0})")]
    FrameUndefined(f64),

    #[error("operator dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("generator has no kernel: {0}")]
    NoKernel(String),

    #[error("propagation failed: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoKernel(_) | Error::Convergence(_))
    }
}
