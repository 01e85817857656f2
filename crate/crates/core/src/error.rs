use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// Restricted column submatrix is rank deficient.
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),

    /// The solver hit its iteration cap. Carries the last iterate.
    #[error("LASSO did not converge after {passes} passes (last change {last_change:e})")]
    NotConverged {
        passes: usize,
        last_change: f64,
        last_iterate: Vec<f64>,
    },

    #[error("no root of the back-off condition in (0, beta - 1) for beta = {beta}, sigma_w = {sigma_w}")]
    NoBackoffRoot { beta: f64, sigma_w: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}
