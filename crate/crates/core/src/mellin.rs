//! Mellin calculus: the symbol of the fractional Laplacian, the multipliers
//! `Lambda_s` and `Lambda_s*`, numerical transforms along vertical lines and the
//! closed-form residue inversion `I_{sigma, nu, b}`.
//!
//! Conventions: `M u(z) = int_0^inf r^{z-1} u(r) dr`, `r^{-z} = exp(-z ln r)`.

use crate::error::{Error, Result, Warning};
use crate::params::Params;
use crate::quad::gauss_legendre;
use crate::radial::{RadialFunction, RadialGrid};
use crate::specfun::{gamma_real, kummer_m, log_gamma, sin_pi, PrecisionPolicy, POLE_GUARD};
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn near_pole(w: Complex64) -> bool {
    let k = w.re.round();
    k <= 0.0 && (w.re - k).abs() < POLE_GUARD && w.im.abs() < POLE_GUARD
}

/// `ln Gamma(w)`, with the pole error naming `factor`.
fn ln_gamma_named(factor: &str, w: Complex64) -> Result<Complex64> {
    if near_pole(w) {
        return Err(Error::Pole { factor: factor.to_string(), location: w });
    }
    log_gamma(w)
}

/// `ln (1 / Gamma(w))`, or `None` where `1/Gamma` vanishes.
fn ln_rgamma(w: Complex64) -> Option<Complex64> {
    if near_pole(w) {
        None
    } else {
        log_gamma(w).ok().map(|v| -v)
    }
}

/// Combines `exp(sum of logs)` where a `None` denominator factor makes the product zero.
fn assemble(num: Complex64, den: &[Option<Complex64>]) -> Complex64 {
    let mut acc = num;
    for d in den {
        match d {
            Some(v) => acc += v,
            None => return c(0.0),
        }
    }
    acc.exp()
}

/// `Theta_s(z) = 2^{2s} Gamma(z/2) Gamma((n+2s-z)/2) / [Gamma((n-z)/2) Gamma((z-2s)/2)]`.
pub fn theta_symbol(p: &Params, z: Complex64) -> Result<Complex64> {
    let (s, n) = (p.s(), p.nf());
    let a = ln_gamma_named("Gamma(z/2)", z / 2.0)?;
    let b = ln_gamma_named("Gamma((n+2s-z)/2)", (c(n + 2.0 * s) - z) / 2.0)?;
    let num = a + b + c(2.0 * s * LN_2);
    Ok(assemble(num, &[ln_rgamma((c(n) - z) / 2.0), ln_rgamma((z - c(2.0 * s)) / 2.0)]))
}

/// `Lambda_s(z) = 2^z Gamma(z/2)/Gamma((n-z)/2) 2^{-z/s} Gamma((n-z)/(2s)) / Gamma(n/2 - n/(2s) + z/(2s))`.
pub fn lambda_multiplier(p: &Params, z: Complex64) -> Result<Complex64> {
    let (s, n) = (p.s(), p.nf());
    let a = ln_gamma_named("Gamma(z/2)", z / 2.0)?;
    let b = ln_gamma_named("Gamma((n-z)/(2s))", (c(n) - z) / (2.0 * s))?;
    let num = a + b + z * LN_2 * (1.0 - 1.0 / s);
    Ok(assemble(num, &[ln_rgamma((c(n) - z) / 2.0), ln_rgamma(c(0.5 * n - 0.5 * n / s) + z / (2.0 * s))]))
}

/// `1 / Lambda_s(z)`; poles at `z = n + 2j` and `z = n(1-s) - 2s l`.
pub fn lambda_inverse(p: &Params, z: Complex64) -> Result<Complex64> {
    let (s, n) = (p.s(), p.nf());
    let a = ln_gamma_named("Gamma((n-z)/2)", (c(n) - z) / 2.0)?;
    let b = ln_gamma_named("Gamma(n/2 - n/(2s) + z/(2s))", c(0.5 * n - 0.5 * n / s) + z / (2.0 * s))?;
    let num = a + b - z * LN_2 * (1.0 - 1.0 / s);
    Ok(assemble(num, &[ln_rgamma(z / 2.0), ln_rgamma((c(n) - z) / (2.0 * s))]))
}

/// `Lambda_s*(z) = 2^z Gamma(z/2)/Gamma(n/2 - z/2) 2^{-z/s} Gamma(n/2 - z/(2s)) / Gamma(z/(2s))`.
pub fn lambda_star_multiplier(p: &Params, z: Complex64) -> Result<Complex64> {
    let (s, n) = (p.s(), p.nf());
    let a = ln_gamma_named("Gamma(z/2)", z / 2.0)?;
    let b = ln_gamma_named("Gamma(n/2 - z/(2s))", c(0.5 * n) - z / (2.0 * s))?;
    let num = a + b + z * LN_2 * (1.0 - 1.0 / s);
    Ok(assemble(num, &[ln_rgamma(c(0.5 * n) - z / 2.0), ln_rgamma(z / (2.0 * s))]))
}

/// `|Lambda_s(sigma + i lambda)|` divided by its large-`lambda` power law
/// `2^{-(1/s-1)n} s^{n/2-(n-sigma)/s} |lambda|^{(1/s-1)(n-sigma)}`.
pub fn lambda_asymptotic_ratio(p: &Params, sigma: f64, lambda: f64) -> Result<f64> {
    let (s, n) = (p.s(), p.nf());
    let l = lambda.abs();
    let ln_pred = -(1.0 / s - 1.0) * n * LN_2 + (0.5 * n - (n - sigma) / s) * s.ln() + (1.0 / s - 1.0) * (n - sigma) * l.ln();
    let v = lambda_multiplier(p, Complex64::new(sigma, lambda))?;
    Ok((v.norm().ln() - ln_pred).exp())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Mellin transform of the eigenfunction `u_nu`:
/// `2^z Gamma(nu + (n-z)/(2s)) Gamma(z/2) / Gamma((n-z)/2)`.
pub fn eigen_mellin(p: &Params, nu: f64, z: Complex64) -> Result<Complex64> {
    let (s, n) = (p.s(), p.nf());
    let a = ln_gamma_named("Gamma(nu + (n-z)/(2s))", c(nu) + (c(n) - z) / (2.0 * s))?;
    let b = ln_gamma_named("Gamma(z/2)", z / 2.0)?;
    Ok(assemble(a + b + z * LN_2, &[ln_rgamma((c(n) - z) / 2.0)]))
}

/// `U_nu(z) = 2^{z/s} Gamma(nu + (n-z)/(2s)) / Gamma((n-z)/(2s)) Gamma(n/2 - n/(2s) + z/(2s))`.
pub fn u_mellin(p: &Params, nu: f64, z: Complex64) -> Result<Complex64> {
    let (s, n) = (p.s(), p.nf());
    let a = ln_gamma_named("Gamma(nu + (n-z)/(2s))", c(nu) + (c(n) - z) / (2.0 * s))?;
    let b = ln_gamma_named("Gamma(n/2 - n/(2s) + z/(2s))", c(0.5 * n - 0.5 * n / s) + z / (2.0 * s))?;
    Ok(assemble(a + b + z * LN_2 / s, &[ln_rgamma((c(n) - z) / (2.0 * s))]))
}

/// A vertical line `Re z = sigma` sampled at increasing `Im z`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalLine {
    pub sigma: f64,
    lambda: Vec<f64>,
}

impl VerticalLine {
    pub fn new(sigma: f64, lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() || !sigma.is_finite() {
            return Err(Error::InvalidParameter("vertical line needs samples and a finite abscissa".into()));
        }
        if lambda.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("lambda samples must be strictly increasing".into()));
        }
        Ok(Self { sigma, lambda })
    }

    /// `count` samples on `[-lambda_max, lambda_max]`.
    pub fn uniform(sigma: f64, lambda_max: f64, count: usize) -> Result<Self> {
        if !(lambda_max > 0.0) || count < 3 {
            return Err(Error::InvalidParameter(format!("uniform line +-{lambda_max} x {count}")));
        }
        let h = 2.0 * lambda_max / (count - 1) as f64;
        let mut lambda: Vec<f64> = (0..count).map(|i| -lambda_max + h * i as f64).collect();
        if count % 2 == 1 {
            lambda[count / 2] = 0.0;
        }
        Self::new(sigma, lambda)
    }

    /// The default line: `|lambda| <= 60`, step `0.05`.
    pub fn default_at(sigma: f64) -> Self {
        Self::uniform(sigma, 60.0, 2401).expect("static line")
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn z(&self, i: usize) -> Complex64 {
        Complex64::new(self.sigma, self.lambda[i])
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.lambda.iter().map(move |&l| Complex64::new(self.sigma, l))
    }
}

/// Values of a Mellin transform along a vertical line.
#[derive(Debug, Clone)]
pub struct MellinLineSamples {
    pub line: VerticalLine,
    pub values: Vec<Complex64>,
    pub warnings: Vec<Warning>,
}

impl MellinLineSamples {
    pub fn new(line: VerticalLine, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != line.lambda.len() {
            return Err(Error::InvalidParameter("one value per lambda sample required".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("non-finite Mellin sample".into()));
        }
        Ok(Self { line, values, warnings: Vec::new() })
    }

    pub fn from_fn(line: VerticalLine, f: impl Fn(Complex64) -> Result<Complex64>) -> Result<Self> {
        let values = line.points().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(line, values)
    }

    /// Largest violation of `v(-lambda) = conj v(lambda)` relative to the peak.
    pub fn conjugate_defect(&self) -> f64 {
        let m = self.values.len();
        let peak = self.values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
        let mut worst = 0.0f64;
        for i in 0..m {
            let j = m - 1 - i;
            if (self.line.lambda[i] + self.line.lambda[j]).abs() < 1e-12 {
                worst = worst.max((self.values[i] - self.values[j].conj()).norm());
            }
        }
        if peak > 0.0 {
            worst / peak
        } else {
            0.0
        }
    }
}

/// Relative magnitude at a grid end above which a divergence warning is raised.
const END_TOL: f64 = 1e-10;

/// `int_0^inf r^{z-1} u(r) dr` along a line: four-point Gauss rule per grid cell in
/// `t = ln r`, with the head and tail expansions of `u` beyond the grid.
pub fn mellin_transform_numeric(u: &RadialFunction, line: &VerticalLine) -> Result<MellinLineSamples> {
    let pts = u.grid.points();
    let (gx, gw) = gauss_legendre(4);
    let mut nodes = Vec::with_capacity(4 * pts.len());
    for w in pts.windows(2) {
        let (a, b) = (w[0].ln(), w[1].ln());
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, wt) in gx.iter().zip(&gw) {
            let t = m + h * x;
            nodes.push((t, h * wt * u.eval(t.exp().clamp(w[0], w[1]))?));
        }
    }
    let (rmin, rmax) = (u.grid.min(), u.grid.max());
    let (lmin, lmax) = (rmin.ln(), rmax.ln());
    let sigma = line.sigma;
    let mut warnings = Vec::new();
    let peak = pts.iter().zip(&u.values).fold(0.0f64, |a, (r, v)| a.max((v * r.powf(sigma)).abs()));
    let head_mag = (u.values[0] * rmin.powf(sigma)).abs();
    let tail_mag = (u.values[u.values.len() - 1] * rmax.powf(sigma)).abs();
    if u.head.is_none() && peak > 0.0 && head_mag > END_TOL * peak {
        warnings.push(Warning::Divergence { end: "lower", magnitude: head_mag / peak });
    }
    if u.tail.is_none() && peak > 0.0 && tail_mag > END_TOL * peak {
        warnings.push(Warning::Divergence { end: "upper", magnitude: tail_mag / peak });
    }
    let mut values = Vec::with_capacity(line.lambda.len());
    for z in line.points() {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(t, wv) in &nodes {
            acc += (z * t).exp() * wv;
        }
        match &u.head {
            Some(h) => {
                for &(q, cq) in &h.terms {
                    let e = z + q;
                    if e.re <= 0.0 {
                        return Err(Error::Divergence(format!("r^(z-1) u(r) not integrable at 0 for Re z = {sigma}")));
                    }
                    acc += cq * (e * lmin).exp() / e;
                }
            }
            None => {
                if z.re <= 0.0 {
                    return Err(Error::Divergence(format!("constant head not integrable for Re z = {sigma}")));
                }
                acc += u.values[0] * (z * lmin).exp() / z;
            }
        }
        if let Some(tl) = &u.tail {
            for &(q, cq) in &tl.terms {
                let e = z + q;
                if e.re >= 0.0 {
                    return Err(Error::Divergence(format!("r^(z-1) u(r) not integrable at infinity for Re z = {sigma}")));
                }
                acc -= cq * (e * lmax).exp() / e;
            }
        }
        values.push(acc);
    }
    let mut out = MellinLineSamples::new(line.clone(), values)?;
    out.warnings = warnings;
    Ok(out)
}

/// Relative end magnitude above which the line samples are rejected.
const DECAY_FAIL: f64 = 1e-6;

fn line_checks(samples: &MellinLineSamples) -> Result<Vec<Warning>> {
    let lam = &samples.line.lambda;
    let m = lam.len();
    if m < 3 {
        return Err(Error::InsufficientDecay("fewer than three line samples".into()));
    }
    let peak = samples.values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let end = samples.values[0].norm().max(samples.values[m - 1].norm());
    if peak == 0.0 {
        return Err(Error::InsufficientDecay("identically zero samples".into()));
    }
    if end > DECAY_FAIL * peak {
        return Err(Error::InsufficientDecay(format!(
            "|values| at |lambda| = {} is {:.3e} of the peak",
            lam[m - 1].abs().max(lam[0].abs()),
            end / peak
        )));
    }
    let mut warnings = samples.warnings.clone();
    if end > END_TOL * peak {
        warnings.push(Warning::TailTruncation { at: lam[m - 1], magnitude: end / peak });
    }
    Ok(warnings)
}

/// Aliasing limit `pi / (max |ln r| + 1)` on the `lambda` step.
fn aliasing_warning(samples: &MellinLineSamples, r: &[f64]) -> Option<Warning> {
    let step = samples.line.lambda.windows(2).fold(0.0f64, |a, w| a.max(w[1] - w[0]));
    let spread = r.iter().fold(0.0f64, |a, x| a.max(x.ln().abs()));
    let limit = PI / (spread + 1.0);
    (step > limit).then_some(Warning::Aliasing { step, limit })
}

/// Trapezoidal inversion at arbitrary radii: real parts, largest imaginary residue, warnings.
pub fn inverse_mellin_at(samples: &MellinLineSamples, r: &[f64]) -> Result<(Vec<f64>, f64, Vec<Warning>)> {
    let mut warnings = line_checks(samples)?;
    warnings.extend(aliasing_warning(samples, r));
    let lam = &samples.line.lambda;
    let m = lam.len();
    let mut weights = vec![0.0; m];
    for i in 0..m - 1 {
        let h = 0.5 * (lam[i + 1] - lam[i]);
        weights[i] += h;
        weights[i + 1] += h;
    }
    let sigma = samples.line.sigma;
    let mut values = Vec::with_capacity(r.len());
    let mut imag = 0.0f64;
    for &x in r {
        if !(x > 0.0) {
            return Err(Error::InvalidParameter(format!("Mellin inversion needs r > 0, got {x}")));
        }
        let t = x.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..m {
            acc += Complex64::from_polar(weights[i], -lam[i] * t) * samples.values[i];
        }
        let v = acc * (-sigma * t).exp() / (2.0 * PI);
        values.push(v.re);
        imag = imag.max(v.im.abs());
    }
    Ok((values, imag, warnings))
}

/// Inversion on a grid, returning the real part and the largest imaginary residue.
pub fn inverse_mellin_detail(samples: &MellinLineSamples, r_grid: &RadialGrid) -> Result<(RadialFunction, f64)> {
    let (values, imag, warnings) = inverse_mellin_at(samples, r_grid.points())?;
    let mut out = RadialFunction::new(r_grid.clone(), values, 0)?;
    out.warnings = warnings;
    Ok((out, imag))
}

/// `(1/2 pi) int r^{-sigma - i lambda} values(lambda) d lambda` by the trapezoidal rule.
pub fn inverse_mellin_numeric(samples: &MellinLineSamples, r_grid: &RadialGrid) -> Result<RadialFunction> {
    Ok(inverse_mellin_detail(samples, r_grid)?.0)
}

/// Inverse Mellin transform of a closure at one point, extending `|lambda|` until the
/// integrand is below `1e-17` of its peak.
pub fn inverse_mellin_point(f: &dyn Fn(Complex64) -> Result<Complex64>, sigma: f64, r: f64, step: f64) -> Result<f64> {
    let t = r.ln();
    let g = |l: f64| -> Result<Complex64> { Ok(f(Complex64::new(sigma, l))? * Complex64::from_polar(1.0, -l * t)) };
    let mut acc = g(0.0)?;
    let mut peak = acc.norm();
    let mut k = 1usize;
    let mut quiet = 0;
    while k < 2_000_000 {
        let l = step * k as f64;
        let a = g(l)?;
        let b = g(-l)?;
        let mag = a.norm().max(b.norm());
        peak = peak.max(mag);
        acc += a + b;
        if mag < 1e-17 * peak {
            quiet += 1;
            if quiet > 20 {
                return Ok((acc * step * (-sigma * t).exp() / (2.0 * PI)).re);
            }
        } else {
            quiet = 0;
        }
        k += 1;
    }
    Err(Error::InsufficientDecay(format!("integrand has not decayed by |lambda| = {}", step * k as f64)))
}

fn nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < POLE_GUARD
}

/// `I_{sigma,nu,b}(rho) = (1/2 pi i) int_{Re z = sigma} Gamma(nu+b-z) Gamma(z) / Gamma(b-z) rho^{-z} dz`
/// in closed form: the Kummer term minus the residues of the `Gamma(z)` poles to the
/// right of the line plus those of the `Gamma(nu+b-z)` poles to its left.
pub fn residue_inverse_i(sigma: f64, nu: f64, b: f64, rho: f64) -> Result<f64> {
    if !(b > 0.0) || !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("need b > 0 and rho > 0, got b = {b}, rho = {rho}")));
    }
    for (name, v) in [("sigma", sigma), ("nu + b", nu + b), ("nu + b - sigma", nu + b - sigma)] {
        if nonpositive_integer(v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} is a non-positive integer")));
        }
    }
    let pol = PrecisionPolicy::default();
    let a = nu + b;
    let mut total = gamma_real(a)? / gamma_real(b)? * kummer_m(a, b, -rho, &pol)?;
    let jmax = (-sigma).floor();
    if jmax >= 0.0 {
        let mut fact = 1.0;
        for j in 0..=(jmax as usize) {
            let jf = j as f64;
            if j > 0 {
                fact *= jf;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            total -= gamma_real(a + jf)? / gamma_real(b + jf)? * sign / fact * rho.powi(j as i32);
        }
    }
    let lmax = (-a + sigma).floor();
    let sn = sin_pi(nu);
    if lmax >= 0.0 && sn != 0.0 {
        let mut fact = 1.0;
        for l in 0..=(lmax as usize) {
            let lf = l as f64;
            if l > 0 {
                fact *= lf;
            }
            total += sn / PI * gamma_real(nu + 1.0 + lf)? * gamma_real(a + lf)? / fact * rho.powf(-a - lf);
        }
    }
    Ok(total)
}
