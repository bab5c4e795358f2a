use crate::error::{Error, Result};
use serde::Serialize;

/// Fractional order `s` and ambient dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    s: f64,
    n: u32,
}

impl Params {
    /// Validates `0 < s <= 1` and `n >= 1`.
    pub fn new(s: f64, n: u32) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidParameter(format!("s = {s} must lie in (0, 1]")));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        Ok(Self { s, n })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// One-dimensional runs only admit integer spectral indices.
    pub fn restricted(&self) -> bool {
        self.n == 1
    }

    /// Bessel order `(n - 2) / 2` of the radial Fourier transform.
    pub fn bessel_order(&self) -> f64 {
        0.5 * (self.nf() - 2.0)
    }

    pub fn is_local(&self) -> bool {
        self.s == 1.0
    }
}
