use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter coordinate sits on or outside its open interval.
    #[error("parameter {index} = {value} is outside the open domain ({lo}, {hi})")]
    Domain {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// `log p(y | θ)` evaluated to −∞ or NaN.
    #[error("log-density is not finite at this observation")]
    NonFinite,

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(&'static str),

    #[error("quadrature did not reach tolerance {tol:e} (achieved error {achieved:e})")]
    Quadrature { tol: f64, achieved: f64 },

    #[error("geodesic integration failed: {0}")]
    Ode(&'static str),

    #[error("tangent frame is rank deficient")]
    RankDeficient,

    #[error("Gram-Schmidt produced {got} normal vectors, expected {expected}")]
    GramSchmidt { expected: usize, got: usize },

    #[error("distributions do not share a support")]
    SupportMismatch,

    #[error("finite-difference step crosses the domain boundary")]
    StepBreakdown,

    #[error("all {0} replicates failed")]
    AllReplicatesFailed(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
