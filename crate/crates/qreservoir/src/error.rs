//! Error types shared by every module in the crate.

use thiserror::Error;

/// Everything that can go wrong when building states, operators, or
/// running the dynamics. Variants are grouped by failure class so a
/// front end can map them onto stable exit codes: parameter validation,
/// numeric trouble, and unreachable physical regimes.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: need at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter {name}: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("truncation overflow: {0}; increase the truncation dimension")]
    TruncationOverflow(String),

    #[error("amplitude too large: |alpha|^2 = {alpha_sq} exceeds dim/4 = {limit}")]
    AmplitudeTooLarge { alpha_sq: f64, limit: f64 },

    #[error("squeeze too large: |zeta| = {zeta} exceeds {limit}")]
    SqueezeTooLarge { zeta: f64, limit: f64 },

    #[error("no convergence: |beta_ee| = {bee} must be strictly below |beta_gg| = {bgg}")]
    NoConvergence { bee: f64, bgg: f64 },

    #[error("outside validity: |epsilon| = {epsilon} exceeds ceiling {ceiling}")]
    OutsideValidity { epsilon: f64, ceiling: f64 },

    #[error("unreachable target: {0}")]
    UnreachableTarget(String),

    #[error("fit failure: {0}")]
    FitFailure(String),

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("oracle invalid: {0}")]
    OracleInvalid(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
