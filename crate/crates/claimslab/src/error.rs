use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeight(String),

    #[error("invalid rule spec: {0}")]
    InvalidRule(String),

    #[error("rule and problem are incompatible: {0}")]
    Incompatible(String),

    #[error("cap solver failed: {0}")]
    Solver(String),

    #[error("independence violated: weights #{first} and #{second} both match the problem")]
    IndependenceViolated { first: usize, second: usize },

    #[error("weights do not form an ({i},{j})-bad pair")]
    NotBadPair { i: usize, j: usize },

    #[error("theorem precondition unmet: rule classified as {class}")]
    PreconditionUnmet { class: String },

    #[error("endowment {endowment} is below the equilibrium total {required}")]
    EndowmentBelowEquilibrium { endowment: f64, required: f64 },

    #[error("market solver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
