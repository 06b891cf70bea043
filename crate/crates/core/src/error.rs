use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parametric coordinate fell outside the curve's domain.
    #[error("parameter {rho} lies outside the curve domain [{min}, {max}]")]
    OutOfDomain { rho: f64, min: f64, max: f64 },

    /// An argument violated its documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A location is too close to the array curve for the point-source model.
    #[error("location ({x}, {y}) lies {distance:e} from the array curve (guard {guard:e})")]
    Singularity {
        x: f64,
        y: f64,
        distance: f64,
        guard: f64,
    },

    /// Closed-form expressions evaluated outside their validity domain.
    #[error("closed form undefined: {0}")]
    Domain(String),

    /// The requested accuracy needs more samples than the configured limit.
    #[error("{required} quadrature samples required, limit is {limit}")]
    Resource { required: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
