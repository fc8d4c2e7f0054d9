//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Basis matrix is singular or numerically too close to singular.
    #[error("singular basis: |det| = {det:.3e} below threshold {threshold:.3e}")]
    SingularBasis { det: f64, threshold: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    /// Strict mode rejects parameter ranges where the mean-square bound
    /// is not established (e.g. l >= 2 with d < 4).
    #[error("shear family (d={d}, l={l}) outside supported range in strict mode")]
    FamilyOutOfRange { d: usize, l: usize },

    #[error("diagonal does not multiply to 1: product = {product}")]
    NotUnimodular { product: f64 },

    #[error("need at least {needed} points for fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::DomainError(msg.into())
    }
}
