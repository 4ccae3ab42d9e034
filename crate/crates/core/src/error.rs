use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate mode label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("mu = {0} is out of range; require 0 <= mu < 1")]
    MuOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symplectic (max deviation {0:e})")]
    NotSymplectic(f64),

    #[error("covariance is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("covariance violates the uncertainty relation (min eigenvalue {0:e})")]
    UncertaintyViolated(f64),

    #[error("covariance matrix is singular")]
    SingularCovariance,

    #[error("observables {0} and {1} do not commute")]
    NonCommuting(usize, usize),

    #[error("observable set is linearly dependent or empty")]
    DegenerateObservables,

    #[error("reference state is not pure (purity {0})")]
    NotPure(f64),

    #[error("truncation loss {loss:e} exceeds the allowed {limit:e}; raise the cutoff")]
    Truncation { loss: f64, limit: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::MuOutOfRange(mu))
    }
}
