//! Log-Gamma on the complex plane and real convenience wrappers.
//!
//! Complex powers use the principal branch, `r^z = exp(z Log r)` for real `r > 0`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Distance from a non-positive integer below which Gamma is treated as a pole.
pub const POLE_GUARD: f64 = 1e-6;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SHIFT: f64 = 15.0;

// B_{2k} / (2k (2k-1)), k = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

fn near_pole(x: f64) -> Option<f64> {
    if x > 0.5 {
        return None;
    }
    let k = x.round();
    if k <= 0.0 && (x - k).abs() < POLE_GUARD {
        Some(k)
    } else {
        None
    }
}

fn pole(factor: &str, z: Complex64) -> Error {
    Error::Pole { factor: factor.to_string(), location: z }
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        corr += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + corr
}

fn ln_gamma_right(z: Complex64) -> Complex64 {
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.norm() < SHIFT {
        acc += w.ln();
        w += 1.0;
    }
    stirling(w) - acc
}

/// `ln sin(pi z)`, stable for large `|Im z|`; the branch is irrelevant after exponentiation.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 1.0 {
        return (PI * z).sin().ln();
    }
    let (w, flip) = if z.im > 0.0 { (z, false) } else { (z.conj(), true) };
    let i = Complex64::i();
    let piw = PI * w;
    let v = -i * piw + (1.0 - (2.0 * i * piw).exp()).ln() + (i / 2.0).ln();
    if flip {
        v.conj()
    } else {
        v
    }
}

/// Complex `ln Gamma(z)`. For `Re z >= 1/2` this is the continuous branch that
/// satisfies `ln Gamma(z+1) = ln z + ln Gamma(z)`; left of that line it is reached
/// by reflection and its imaginary part is defined modulo `2 pi`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParameter(format!("log_gamma at {z}")));
    }
    if z.im.abs() < POLE_GUARD && near_pole(z.re).is_some() {
        return Err(pole("Gamma", z));
    }
    if z.im == 0.0 && z.re >= 0.5 {
        Ok(Complex64::new(ln_gamma_pos(z.re), 0.0))
    } else if z.re >= 0.5 {
        Ok(ln_gamma_right(z))
    } else {
        Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_right(1.0 - z))
    }
}

/// Complex Gamma via `exp(log_gamma)`.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// Reciprocal Gamma, entire; exactly zero at the non-positive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(rgamma_real(z.re), 0.0);
    }
    if z.re >= 0.5 {
        (-ln_gamma_right(z)).exp()
    } else {
        // 1/Gamma(z) = Gamma(1-z) sin(pi z) / pi
        (ln_gamma_right(1.0 - z) + ln_sin_pi(z)).exp() / PI
    }
}

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    (PI * r).sin()
}

fn stirling_corr(w: f64) -> f64 {
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut p = inv;
    for c in STIRLING {
        corr += c * p;
        p *= inv2;
    }
    corr
}

/// `|Gamma(theta + i lambda/2)| / [sqrt(2 pi) e^{-pi |lambda|/4} (|lambda|/2)^{theta - 1/2}]`, formed in log space.
pub fn stirling_modulus_ratio(theta: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("Stirling ratio needs finite lambda != 0, got {lambda}")));
    }
    let y = 0.5 * lambda.abs();
    let lg = log_gamma(Complex64::new(theta, y))?.re;
    Ok((lg - LN_SQRT_2PI + 0.5 * PI * y - (theta - 0.5) * y.ln()).exp())
}

/// `Gamma(x)` for `0.5 <= x < 30` from the shifted Stirling product form.
fn gamma_moderate(x: f64) -> f64 {
    let mut w = x;
    let mut prod = 1.0;
    while w < SHIFT {
        prod *= w;
        w += 1.0;
    }
    let half = w.powf(0.5 * (w - 0.5));
    half * half * (-w).exp() * LN_SQRT_2PI.exp() * stirling_corr(w).exp() / prod
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 30.0 {
        if x == x.floor() && x <= 3.0 {
            return if x == 3.0 { 2f64.ln() } else { 0.0 };
        }
        return gamma_moderate(x).ln();
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_corr(x)
}

/// Real `(ln |Gamma(x)|, sign Gamma(x))`.
pub fn ln_gamma_real(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("ln_gamma_real at {x}")));
    }
    if near_pole(x).is_some() {
        return Err(pole("Gamma", Complex64::new(x, 0.0)));
    }
    if x >= 0.5 {
        Ok((ln_gamma_pos(x), 1.0))
    } else {
        let s = sin_pi(x);
        Ok(((PI / s.abs()).ln() - ln_gamma_pos(1.0 - x), s.signum()))
    }
}

/// Real Gamma.
pub fn gamma_real(x: f64) -> Result<f64> {
    if x > 0.0 && x <= 30.0 && x == x.floor() {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    if (0.5..30.0).contains(&x) {
        return Ok(gamma_moderate(x));
    }
    let (l, s) = ln_gamma_real(x)?;
    Ok(s * l.exp())
}

/// Real reciprocal Gamma; zero at the non-positive integers, never an error.
pub fn rgamma_real(x: f64) -> f64 {
    if x >= 0.5 {
        if x <= 30.0 && x == x.floor() {
            return 1.0 / gamma_real(x).unwrap_or(f64::INFINITY);
        }
        if x < 30.0 {
            return 1.0 / gamma_moderate(x);
        }
        (-ln_gamma_pos(x)).exp()
    } else {
        let s = sin_pi(x);
        if s == 0.0 {
            return 0.0;
        }
        s * ln_gamma_pos(1.0 - x).exp() / PI
    }
}

/// Upper bound for `|1/Gamma(x)|` that ignores the sine factor; used for series envelopes.
pub(crate) fn ln_rgamma_envelope(x: f64) -> f64 {
    if x >= 0.5 {
        -ln_gamma_pos(x)
    } else {
        ln_gamma_pos(1.0 - x) - PI.ln()
    }
}

/// `Gamma(a) / Gamma(b)` for real arguments, computed from log differences.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    let (la, sa) = ln_gamma_real(a)?;
    let rb = rgamma_real(b);
    if rb == 0.0 {
        return Ok(0.0);
    }
    let lb = ln_rgamma_envelope(b);
    let sb = rb.signum();
    // |1/Gamma(b)| = envelope * |sin| factor when b < 1/2
    let mag = if b >= 0.5 { (la + lb).exp() } else { (la + lb).exp() * sin_pi(b).abs() };
    Ok(sa * sb * mag)
}
