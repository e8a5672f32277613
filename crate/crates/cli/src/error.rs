use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] dickecool::Error),

    #[error("verification failed: {0} check(s) did not pass")]
    Verification(usize),
}

impl CliError {
    /// Process exit status: 1 usage/config, 2 verification, 3 numerics.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 2,
            CliError::Core(e) if e.is_numerical() || matches!(e, dickecool::Error::Dimension { .. }) => 3,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Verification(3).exit_code(), 2);
        assert_eq!(CliError::from(dickecool::Error::Convergence("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(dickecool::Error::NoKernel("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(dickecool::Error::DimensionCap { dim: 2, cap: 1 }).exit_code(), 1);
        assert_eq!(CliError::from(dickecool::Error::Parameter("x".into())).exit_code(), 1);
    }
}
