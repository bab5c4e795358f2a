use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma pole in factor {factor} at {location}")]
    Pole { factor: String, location: Complex64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge after {terms} terms ({context})")]
    NonConvergence { terms: usize, context: String },

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("r = {r} lies outside the sampled range [{lo}, {hi}]")]
    Extrapolation { r: f64, lo: f64, hi: f64 },

    #[error("outside the validity regime: {reason} (advice: {advice})")]
    OutOfRegime { reason: String, advice: String },

    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),

    #[error("weight overflow: integrand still grows at rho = {at} (tail share {ratio:.3e})")]
    WeightOverflow { at: f64, ratio: f64 },

    #[error("routes disagree: a = {a}, b = {b}, |a - b| = {diff:.3e}")]
    Reconciliation { a: f64, b: f64, diff: f64 },

    #[error("substitution leaves the computed grid: needs {needed}, grid ends at {available}")]
    ResamplingRange { needed: f64, available: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal diagnostics attached to numerical results.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    TailTruncation { at: f64, magnitude: f64 },
    Divergence { end: &'static str, magnitude: f64 },
    Aliasing { step: f64, limit: f64 },
    GridResolution { estimate: f64 },
    ModeTruncation { estimate: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::TailTruncation { at, magnitude } => {
                write!(f, "integrand not negligible at {at} ({magnitude:.3e})")
            }
            Warning::Divergence { end, magnitude } => {
                write!(f, "integrand has not decayed at the {end} grid end ({magnitude:.3e})")
            }
            Warning::Aliasing { step, limit } => {
                write!(f, "lambda step {step:.3e} exceeds aliasing limit {limit:.3e}")
            }
            Warning::GridResolution { estimate } => {
                write!(f, "finite-difference error estimate {estimate:.3e}")
            }
            Warning::ModeTruncation { estimate } => {
                write!(f, "last retained mode carries relative weight {estimate:.3e}")
            }
        }
    }
}
