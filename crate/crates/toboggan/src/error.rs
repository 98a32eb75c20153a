use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Integration blew up: step too large or ε outside the method's range.
    #[error("solution became non-finite at t = {t} (E = {energy})")]
    NonFiniteState { t: f64, energy: f64 },

    #[error("invalid bracket [{lo}, {hi}]: endpoint values do not change sign")]
    BracketInvalid { lo: f64, hi: f64 },

    #[error("digamma requires x > 0, got {0}")]
    Domain(f64),

    /// Pair-presence predicate flipped non-monotonically during ε-bisection.
    #[error("exceptional-point predicate is noisy over [{eps_lo}, {eps_hi}]: {detail}")]
    PredicateNoisy {
        eps_lo: f64,
        eps_hi: f64,
        detail: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
