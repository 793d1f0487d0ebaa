use thiserror::Error;

pub type Result<T> = std::result::Result<T, AoiError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AoiError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("source index {index} out of range 1..={n_sources}")]
    InvalidSource { index: usize, n_sources: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("chain is not irreducible; states unreachable from state 1: {unreachable:?}")]
    Reducible { unreachable: Vec<usize> },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("first-moment system has no non-negative solution (minimum component {min})")]
    NegativeSolution { min: f64 },

    #[error("s = {s} is outside the convergence region of the MGF (bound {bound})")]
    OutsideConvergence { s: f64, bound: f64 },

    #[error("single source: {0}")]
    SingleSource(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),
}
