use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested temperature lies above the crossover temperature, where
    /// no periodic bounce exists.
    #[error("temperature {t_star} K exceeds the crossover temperature {t_crit} K")]
    QuantumRegimeExceeded { t_star: f64, t_crit: f64 },

    /// K(p) at p = 1.
    #[error("complete elliptic integral diverges at p = 1")]
    Divergent,

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("fit needs at least {needed} points in the window, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("integrator failure: {0}")]
    Integrator(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
