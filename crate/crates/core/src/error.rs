use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no entry in the sample table for the requested point")]
    MissingTableEntry,

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    CapExceeded { dim: u128, cap: u128 },

    #[error("no sign change found on a grid of {grid} angles (max |phi| = {max_abs})")]
    NoSignChange { grid: usize, max_abs: f64 },

    #[error("null direction is ambiguous: two smallest singular values {s0:e} and {s1:e}")]
    IllConditioned { s0: f64, s1: f64 },

    #[error("points w_i^2 are not pairwise distinct (min separation {min_sep:e})")]
    DegenerateSquares { min_sep: f64 },

    #[error("iteration limit reached (best gap {gap:e})")]
    IterationLimit { gap: f64 },

    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualExceeded { residual: f64, tol: f64 },

    #[error("search did not converge: best residual {best_residual:e} after {restarts} restarts")]
    NotConverged {
        best_residual: f64,
        restarts: usize,
        best: Box<crate::circle::ConvexCertificate>,
    },

    #[error("no feasible configuration found within budget")]
    NoFeasiblePoint,

    #[error("map failed the oddness audit (residual {residual:e})")]
    NotOdd { residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
