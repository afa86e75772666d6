use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("rectangle is not up-traversable by the given seeds")]
    NotTraversable,
    #[error("no path partition satisfies the step constraints: {0}")]
    StructureViolation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("fixed-point iteration did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("invalid box: lower corner {lo:?} is not below upper corner {hi:?}")]
    InvalidBox { lo: (f64, f64), hi: (f64, f64) },
    #[error("negative growth: s={s}, t={t}")]
    NegativeGrowth { s: f64, t: f64 },
    #[error("path is not coordinate-wise non-decreasing at point {0}")]
    NonMonotonePath(usize),
    #[error("trajectory too large: {cells} cells exceeds budget {budget}")]
    TrajectoryTooLarge { cells: u64, budget: u64 },
    #[error("non-integral term in growth count for b={0}")]
    NonIntegralTerm(u32),
}

impl Error {
    /// Stable machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InstanceTooLarge(_) => "instance-too-large",
            Error::NotTraversable => "not-traversable",
            Error::StructureViolation(_) => "structure-violation",
            Error::Domain(_) => "domain-error",
            Error::NoConvergence(_) => "no-convergence",
            Error::InvalidBox { .. } => "invalid-box",
            Error::NegativeGrowth { .. } => "negative-growth",
            Error::NonMonotonePath(_) => "non-monotone-path",
            Error::TrajectoryTooLarge { .. } => "trajectory-too-large",
            Error::NonIntegralTerm(_) => "non-integral-term",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
