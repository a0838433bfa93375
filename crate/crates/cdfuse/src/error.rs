use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "no convergence in {what} after {iterations} iterations \
         (partial sum {partial}, last term {last_term:e})"
    )]
    Convergence {
        what: &'static str,
        iterations: u64,
        partial: f64,
        last_term: f64,
    },

    #[error("{family} fit failed: {message} (residuals {residuals:?})")]
    Fit {
        family: &'static str,
        message: String,
        residuals: Vec<f64>,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("cannot combine: {0}")]
    Combination(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Config and input problems, as opposed to failures inside the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Usage(_) | Error::Csv(_) | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
