use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("orthonormal basis of degree {degree} is ill-conditioned (Gram deviation {deviation:.3e})")]
    IllConditionedBasis { degree: usize, deviation: f64 },

    #[error("thinning bound violated at t = {time}: rate {rate} exceeds bound {bound}")]
    ThinningBoundViolated { time: f64, rate: f64, bound: f64 },

    #[error("leapfrog failed to reach energy tolerance {tolerance:e} after {halvings} step halvings")]
    EnergyTolerance { tolerance: f64, halvings: u32 },

    #[error("decay curve never drops below eps = {eps} on its grid (last value {last})")]
    NoCrossing { eps: f64, last: f64 },

    #[error("no feasible (rate, delay) pair majorises the curve on its grid")]
    NoFeasibleContraction,

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("sampler failed stationarity gate: {0}")]
    Stationarity(String),

    #[error("inner replica count too small: relative standard error {relative_se:.3} at t = {time}")]
    InnerReplicas { time: f64, relative_se: f64 },

    #[error("exact constants are irrational on this branch: {0}")]
    IrrationalBranch(String),

    #[error("Galerkin truncation not converged: change {change:.3e} between degrees {degree} and {next}")]
    NotConverged { degree: usize, next: usize, change: f64 },

    #[error("matrix exponential failed: {0}")]
    MatrixExponential(String),

    #[error("eigenvalue computation failed: {0}")]
    Eigenvalues(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
