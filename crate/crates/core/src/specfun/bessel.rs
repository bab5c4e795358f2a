use super::gamma::ln_gamma_real;
use std::f64::consts::{FRAC_2_PI, PI};

fn half_integer(nu: f64) -> Option<i32> {
    let t = nu - 0.5;
    if t == t.round() {
        Some(t as i32)
    } else {
        None
    }
}

fn j_series(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let q = -h * h;
    let lead = match ln_gamma_real(nu + 1.0) {
        Ok((l, s)) => s * (nu * h.ln() - l).exp(),
        Err(_) => 0.0,
    };
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn asymptotic_pq(nu: f64, x: f64) -> Option<(f64, f64)> {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * x);
        let mag = a.abs();
        if mag > last {
            return if last < 1e-15 { Some((p, q)) } else { None };
        }
        last = mag;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * a;
        } else {
            p += sign * a;
        }
        if mag < 1e-17 {
            break;
        }
    }
    Some((p, q))
}

fn j_asymptotic(nu: f64, x: f64) -> Option<f64> {
    let (p, q) = asymptotic_pq(nu, x)?;
    let chi = x - (0.5 * nu + 0.25) * PI;
    Some((FRAC_2_PI / x).sqrt() * (p * chi.cos() - q * chi.sin()))
}

fn j_miller(nu: f64, x: f64) -> f64 {
    let n = 2 * (((x + 30.0 + 6.0 * x.sqrt()) / 2.0).ceil() as usize) + 2;
    let mut jp1 = 0.0f64;
    let mut j = 1e-30f64;
    // coefficients c_m = (nu + 2m) Gamma(nu + m) / m!, scaled by 1/Gamma(nu+1)
    let mut g = vec![0.0; n / 2 + 1];
    g[0] = 1.0;
    if n / 2 >= 1 {
        g[1] = 1.0;
    }
    for m in 2..=n / 2 {
        let mf = m as f64;
        g[m] = g[m - 1] * (nu + mf - 1.0) / mf;
    }
    let coef = |m: usize| if m == 0 { 1.0 } else { (nu + 2.0 * m as f64) * g[m] };
    let mut norm = 0.0;
    if n % 2 == 0 {
        norm += coef(n / 2) * j;
    }
    for k in (1..=n).rev() {
        let jm1 = 2.0 * (nu + k as f64) / x * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx % 2 == 0 {
            norm += coef(idx / 2) * j;
        }
        if j.abs() > 1e200 {
            j *= 1e-200;
            jp1 *= 1e-200;
            norm *= 1e-200;
        }
    }
    // (x/2)^nu / Gamma(nu + 1) = sum_m c_m J_{nu+2m}
    let lead = match ln_gamma_real(nu + 1.0) {
        Ok((l, s)) => s * (nu * (0.5 * x).ln() - l).exp(),
        Err(_) => 0.0,
    };
    j * lead / norm
}

/// Bessel function of the first kind `J_nu(x)`, `nu >= -1/2`, `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if let Some(k) = half_integer(nu) {
        if k == -1 {
            return (FRAC_2_PI / x).sqrt() * x.cos();
        }
        if k == 0 {
            return (FRAC_2_PI / x).sqrt() * x.sin();
        }
        if k == 1 && x > 1.0 {
            return (FRAC_2_PI / x).sqrt() * (x.sin() / x - x.cos());
        }
    }
    let big = 20f64.max(nu * nu);
    if x <= 2.0 || 0.25 * x * x < nu + 1.0 {
        return j_series(nu, x);
    }
    if x >= big {
        if let Some(v) = j_asymptotic(nu, x) {
            return v;
        }
    }
    j_miller(nu, x)
}

fn i_series_scaled(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let q = h * h;
    let lead = match ln_gamma_real(nu + 1.0) {
        Ok((l, s)) => s * (nu * h.ln() - l - x).exp(),
        Err(_) => 0.0,
    };
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..2000 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    lead * sum
}

/// `e^{-x} I_nu(x)` for `nu >= -1/2`, `x >= 0`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x <= 25.0 || x < nu * nu {
        return i_series_scaled(nu, x);
    }
    let mu = 4.0 * nu * nu;
    let mut a = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= -(mu - odd * odd) / (kf * 8.0 * x);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        sum += a;
        if a.abs() < 1e-17 {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

/// Modified Bessel function `I_nu(x)`; overflows like `e^x`.
pub fn bessel_i(nu: f64, x: f64) -> f64 {
    if x <= 700.0 {
        bessel_i_scaled(nu, x) * x.exp()
    } else {
        let v = bessel_i_scaled(nu, x);
        if v == 0.0 {
            0.0
        } else {
            v * x.exp()
        }
    }
}
