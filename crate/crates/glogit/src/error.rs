//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numerical routines and the sampler.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the mathematical domain of an operation.
    #[error("domain error in {func}: {msg}")]
    Domain { func: &'static str, msg: String },

    /// The root-finding bracket does not straddle a sign change.
    #[error("no sign change on [{lo}, {hi}]: f(lo)={f_lo:e}, f(hi)={f_hi:e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    /// An iterative method hit its iteration cap before converging.
    #[error("{func} did not converge within {max_iter} iterations")]
    NonConvergence { func: &'static str, max_iter: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix that must be symmetric positive definite failed its
    /// triangular factorization.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("series too short: {len} draws, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("max_lag {max_lag} too large for a series of length {len}")]
    LagTooLarge { max_lag: usize, len: usize },

    #[error("empty chain")]
    EmptyChain,

    /// A per-update failure annotated with the Gibbs sweep at which it occurred.
    #[error("sampler failed at sweep {sweep}: {source}")]
    AtSweep {
        sweep: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            func,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
