use thiserror::Error;

/// Errors raised by the solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The one-body problem has no interior minimizer in the transit region:
    /// `sigma2 >= a - 1`, equivalently `Qhat <= 1/(a - 1)`.
    #[error("degenerate curvature: effective variance {sigma2} >= a - 1 = {limit}")]
    DegenerateCurvature { sigma2: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bracket [{low}, {high}] does not straddle the boundary")]
    NoSignChange { low: f64, high: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("not enough converged runs: {converged} of {requested}")]
    InsufficientRuns { converged: usize, requested: usize },

    #[error("malformed instance data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
