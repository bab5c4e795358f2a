//! Special functions: log-Gamma, Kummer, Gauss and Fox-Wright series, Bessel
//! functions, Laguerre/Hermite polynomials and associated Legendre functions.

mod bessel;
mod gamma;
mod hyper;
mod orthopoly;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_j};
pub use gamma::{
    gamma, gamma_ratio, gamma_real, ln_gamma_real, log_gamma, rgamma, rgamma_real, sin_pi, stirling_modulus_ratio, POLE_GUARD,
};
pub use hyper::{
    fox_wright_1psi1, fox_wright_1psi1_accurate, fox_wright_1psi1_detail, fox_wright_1psi1_mp, gauss_2f1, hyp2f1_series, kummer_m,
    kummer_m_scaled, SeriesSum,
};
pub use orthopoly::{hermite, laguerre, laguerre_all, legendre_p};

use crate::error::{Error, Result};

/// Tolerances and term cap shared by the series evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPolicy {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-16, abs_tol: 0.0, max_terms: 10_000 }
    }
}

impl PrecisionPolicy {
    pub fn new(rel_tol: f64, abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_terms < 1 {
            return Err(Error::InvalidParameter(format!("precision policy rel_tol={rel_tol}, abs_tol={abs_tol}, max_terms={max_terms}")));
        }
        Ok(Self { rel_tol, abs_tol, max_terms })
    }
}

/// Plateau detector: three consecutive negligible terms end a series.
pub(crate) struct Plateau {
    quiet: u32,
}

impl Plateau {
    pub(crate) fn new() -> Self {
        Self { quiet: 0 }
    }

    pub(crate) fn done(&mut self, term: f64, sum: f64, pol: &PrecisionPolicy) -> bool {
        if term.abs() <= pol.rel_tol * sum.abs() + pol.abs_tol {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= 3
    }
}

pub(crate) fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}
