use super::gamma::rgamma_real;
use super::hyper::hyp2f1_series;
use super::PrecisionPolicy;
use crate::error::{Error, Result};

/// Generalized Laguerre polynomial `L_k^{(alpha)}(x)` by the three-term recurrence.
pub fn laguerre(k: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for m in 1..k {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - x) * cur - (mf + alpha) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_0^{(alpha)}(x), ..., L_k^{(alpha)}(x)`.
pub fn laguerre_all(k: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k == 0 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for m in 1..k {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - x) * out[m] - (mf + alpha) * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
    out
}

/// Physicists' Hermite polynomial `H_k(x)`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for m in 1..k {
        let next = 2.0 * x * cur - 2.0 * m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Associated Legendre function of the first kind on the cut, `|x| < 1`:
/// `P^mu_nu(x) = ((1+x)/(1-x))^{mu/2} 2F1(-nu, nu+1; 1-mu; (1-x)/2) / Gamma(1-mu)`.
pub fn legendre_p(mu: f64, nu: f64, x: f64, pol: &PrecisionPolicy) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("legendre_p needs |x| < 1, got {x}")));
    }
    let c = 1.0 - mu;
    if c <= 0.0 && c == c.round() {
        return Err(Error::Pole { factor: "1 - mu".into(), location: num_complex::Complex64::new(c, 0.0) });
    }
    let f = hyp2f1_series(-nu, nu + 1.0, c, 0.5 * (1.0 - x), pol)?;
    Ok(((1.0 + x) / (1.0 - x)).powf(0.5 * mu) * f * rgamma_real(c))
}
