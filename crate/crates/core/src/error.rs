//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("exponent domain error: {0}")]
    ExponentDomain(String),

    #[error("Sobolev exponent for l >= n needs an explicit choice in (l, oo); none supplied")]
    MissingSigmaStarChoice,

    #[error("theta exponents undefined: qs' = {qs_prime} is not below sigma_bar_star = {sigma_star}")]
    ThetaUndefined { qs_prime: String, sigma_star: String },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid integrand: {0}")]
    InvalidIntegrand(String),

    #[error("integrand is singular at x = 0 (kappa > 0 and beta > 0); cannot evaluate there")]
    SingularPoint,

    #[error("gradient undefined: p_{index} = {p} < 2 makes the density non-C1 at xi_i = 0")]
    NonSmoothGradient { index: usize, p: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("a cell center of the requested grid hits the integrand singularity at the origin")]
    GridHitsSingularity,

    #[error("field/grid dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("solver aborted: {0}")]
    SolverAbort(String),

    #[error("diagnostics domain error: {0}")]
    DiagnosticsDomain(String),

    #[error("weight lambda_{index} vanishes at quadrature node {node} of the region; the r-norm of its inverse diverges")]
    DegenerateWeight { index: usize, node: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("field file parse error: {0}")]
    FieldParse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
