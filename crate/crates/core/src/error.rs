use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A count table would not fit in the configured memory budget.
    #[error("table up to x = {limit} needs about {needed} bytes, over the budget of {budget} bytes")]
    ResourceLimit { limit: u64, needed: u128, budget: u128 },

    /// A phase could not be resolved modulo 1 to the required accuracy.
    #[error("phase error bound {bound:e} exceeds {required:e} at {precision} bits")]
    Precision { bound: f64, required: f64, precision: usize },

    #[error("quadrature did not converge (error estimate {estimate:e}, requested {requested:e})")]
    Quadrature { estimate: f64, requested: f64 },

    /// Sampled |f''| left [mu, eta * mu]; this indicates a bug, not a failure of the math.
    #[error("|f''({alpha})| = {value:e} outside [{lower:e}, {upper:e}]")]
    EnvelopeViolation { alpha: f64, value: f64, lower: f64, upper: f64 },

    /// Two exact algorithms disagreed on the same input.
    #[error("exact audit failed: {0}")]
    Audit(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
