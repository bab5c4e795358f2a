//! Hankel transforms of order `(n-2)/2`, the radial fractional Laplacian, the
//! operators `L_s`, `L_s*` and the maps `u -> u†`, `Phi_s^{-1}`, `w -> w‡`.
//!
//! The transform pair is `F[u](zeta) = zeta^{-nu} int_0^inf J_nu(zeta r) r^{nu+1} u(r) dr`
//! with `nu = (n-2)/2`; it is symmetric and self-inverse.

use crate::error::{Error, Result, Warning};
use crate::params::Params;
use crate::quad::{integrate_breaks, wynn_epsilon, QuadConfig};
use crate::radial::{PowerSeries, RadialFunction, RadialGrid, SpectralProfile, SpectralRadialFunction};
use crate::specfun::{bessel_j, gamma_real, rgamma_real};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Relative size below which a tail-expansion term counts as negligible.
const SERIES_TOL: f64 = 1e-15;
/// Largest tolerated ratio of the absolute term sum to the tail value.
const TAIL_CANCEL: f64 = 100.0;
/// Panel budget for a single oscillatory quadrature.
const MAX_OSC_PANELS: usize = 400_000;
/// Relative magnitude at a grid end above which a truncation warning is raised.
const END_TOL: f64 = 1e-10;

fn osc_cfg() -> QuadConfig {
    QuadConfig { rel_tol: 1e-13, abs_tol: 1e-300, max_panels: 50_000, l1_rel: 2e-14 }
}

/// Knot intervals spanned by one Kronrod panel on interpolated data.
const KNOT_STRIDE: usize = 8;

/// Interpolated data are integrated on knot-aligned panels without refinement.
fn sampled_cfg(breaks: usize) -> QuadConfig {
    QuadConfig { rel_tol: 1e-10, abs_tol: 1e-300, max_panels: breaks + 8, l1_rel: 1e-12 }
}

fn merge_breaks(mut breaks: Vec<f64>, knots: &[f64]) -> Vec<f64> {
    let b = *breaks.last().unwrap_or(&0.0);
    breaks.extend(knots.iter().step_by(KNOT_STRIDE).copied().filter(|&k| k > 0.0 && k < b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn bessel_order(n: u32) -> f64 {
    0.5 * (n as f64 - 2.0)
}

/// `J_nu(x) / x^nu`, regular at `x = 0`.
pub(crate) fn bessel_reduced(nu: f64, x: f64) -> f64 {
    if x < 1.0 {
        let q = -0.25 * x * x;
        let mut term = rgamma_real(nu + 1.0);
        let mut sum = term;
        for m in 1..40 {
            let mf = m as f64;
            term *= q / (mf * (mf + nu));
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum * 0.5f64.powf(nu)
    } else {
        bessel_j(nu, x) * x.powf(-nu)
    }
}

/// Break points for `f(x) J_nu(k x)` on `[0, b]`: a geometric cluster at the
/// origin and the approximate Bessel zeros.
fn oscillatory_breaks(nu: f64, k: f64, b: f64) -> Result<Vec<f64>> {
    let first = if k > 0.0 { ((1.0 + 0.5 * nu - 0.25) * PI / k).min(b) } else { b };
    let mut breaks = vec![0.0];
    for j in (1..=45).rev() {
        breaks.push(first * 0.5f64.powi(j));
    }
    breaks.push(first);
    if k > 0.0 {
        let count = (b * k / PI).ceil() as usize;
        if count > MAX_OSC_PANELS {
            return Err(Error::Quadrature(format!("{count} oscillation panels needed for k = {k} on [0, {b}]")));
        }
        let mut m = 2.0;
        loop {
            let z = (m + 0.5 * nu - 0.25) * PI / k;
            if z >= b {
                break;
            }
            breaks.push(z);
            m += 1.0;
        }
    }
    if *breaks.last().unwrap() < b {
        breaks.push(b);
    }
    breaks.dedup();
    Ok(breaks)
}

/// Coefficient of `r^{-n-p}` in the inverse transform of `zeta^p`.
pub fn power_transform_coefficient(n: u32, p: f64) -> Option<f64> {
    let nf = n as f64;
    if !(p > -nf) {
        return None;
    }
    let rg = rgamma_real(-0.5 * p);
    if rg == 0.0 {
        return Some(0.0);
    }
    let g = gamma_real(0.5 * (nf + p)).ok()?;
    Some(2f64.powf(0.5 * nf + p) * g * rg)
}

/// Large-`r` expansion of the inverse transform generated by the small-`zeta`
/// behaviour of a profile.
pub fn tail_series(profile: &SpectralProfile, n: u32) -> Option<PowerSeries> {
    let mut terms = Vec::new();
    for &(p, c) in &profile.small.terms {
        let a = power_transform_coefficient(n, p)?;
        if a != 0.0 {
            terms.push((-(n as f64) - p, c * a));
        }
    }
    if terms.is_empty() {
        None
    } else {
        Some(PowerSeries::new(terms))
    }
}

/// Exponents and coefficients of the large-`r` expansion, `None` if a power is not admissible.
fn tail_terms(profile: &SpectralProfile, n: u32) -> Option<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(profile.small.terms.len());
    for &(p, c) in &profile.small.terms {
        let a = power_transform_coefficient(n, p)?;
        if a != 0.0 {
            out.push((-(n as f64) - p, c * a));
        }
    }
    Some(out)
}

/// Sums the tail expansion at `r` if it has converged to `SERIES_TOL` without
/// cancelling more than `TAIL_CANCEL`.
fn tail_sum(terms: &[(f64, f64)], r: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut abs = 0.0;
    let mut quiet = 0;
    let ln_r = r.ln();
    for &(e, c) in terms {
        let t = c * (e * ln_r).exp();
        if !t.is_finite() {
            return None;
        }
        sum += t;
        abs += t.abs();
        if t.abs() <= SERIES_TOL * sum.abs() {
            quiet += 1;
            if quiet >= 2 {
                return (abs <= TAIL_CANCEL * sum.abs()).then_some(sum);
            }
        } else {
            quiet = 0;
        }
    }
    None
}

/// Inverse transform of a profile at one radius.
pub fn hankel_profile_at(profile: &SpectralProfile, n: u32, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius {r}")));
    }
    if r > 0.0 {
        if let Some(v) = tail_terms(profile, n).and_then(|t| tail_sum(&t, r)) {
            return Ok(v);
        }
    }
    hankel_quadrature_at(profile, n, r)
}

/// Inverse transform of a profile at one radius by oscillatory quadrature only.
pub fn hankel_quadrature_at(profile: &SpectralProfile, n: u32, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius {r}")));
    }
    let nu = bessel_order(n);
    let f = profile.func();
    let d = n as f64 - 1.0;
    let integrand = move |z: f64| {
        if z == 0.0 {
            return 0.0;
        }
        let v = f(z);
        if v == 0.0 {
            0.0
        } else {
            bessel_reduced(nu, z * r) * z.powf(d) * v
        }
    };
    let breaks = oscillatory_breaks(nu, r, profile.cut)?;
    let (breaks, cfg) = match &profile.knots {
        Some(k) => {
            let b = merge_breaks(breaks, k);
            let c = sampled_cfg(b.len());
            (b, c)
        }
        None => (breaks, osc_cfg()),
    };
    let res = integrate_breaks(&integrand, &breaks, &cfg);
    if !res.value.is_finite() {
        return Err(Error::Quadrature(format!("non-finite Hankel integral at r = {r}")));
    }
    Ok(res.value)
}

/// `int_0^cut zeta^{2m+n-1} f(zeta) d zeta`.
fn profile_moment(profile: &SpectralProfile, n: u32, m: usize) -> f64 {
    let f = profile.func();
    let e = 2.0 * m as f64 + n as f64 - 1.0;
    let g = move |z: f64| if z == 0.0 { 0.0 } else { z.powf(e) * f(z) };
    let breaks = oscillatory_breaks(0.0, 0.0, profile.cut).unwrap_or_else(|_| vec![0.0, profile.cut]);
    integrate_breaks(&g, &breaks, &QuadConfig::default()).value
}

/// Small-`r` expansion of the inverse transform from the moments of the profile.
pub fn head_series(profile: &SpectralProfile, n: u32, terms: usize) -> PowerSeries {
    let nu = bessel_order(n);
    let mut out = Vec::new();
    let mut fact = 1.0;
    for m in 0..terms {
        if m > 0 {
            fact *= m as f64;
        }
        let mu = profile_moment(profile, n, m);
        let c = if m % 2 == 0 { 1.0 } else { -1.0 } * mu * rgamma_real(m as f64 + nu + 1.0) / (2f64.powf(2.0 * m as f64 + nu) * fact);
        if c.is_finite() {
            out.push((2.0 * m as f64, c));
        }
    }
    PowerSeries::new(out)
}

/// Samples the inverse transform of a profile on a grid, attaching head and tail expansions.
pub fn hankel_inverse_profile(profile: &SpectralProfile, n: u32, grid: &RadialGrid) -> Result<RadialFunction> {
    let terms = tail_terms(profile, n);
    let values = grid
        .points()
        .par_iter()
        .map(|&r| match terms.as_deref().and_then(|t| if r > 0.0 { tail_sum(t, r) } else { None }) {
            Some(v) => Ok(v),
            None => hankel_quadrature_at(profile, n, r),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = RadialFunction::new(grid.clone(), values, n)?;
    out.head = Some(head_series(profile, n, 3));
    out.tail = tail_series(profile, n);
    out.transform = Some(profile.clone());
    Ok(out)
}

/// Inverse Hankel transform `zeta-samples -> r-samples`.
pub fn hankel_inverse(w: &SpectralRadialFunction, r_grid: &RadialGrid) -> Result<RadialFunction> {
    let profile = w.as_profile();
    let mut out = hankel_inverse_profile(&profile, w.n, r_grid)?;
    if w.profile.is_none() {
        out.transform = None;
        let vmax = w.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let end = w.values.last().copied().unwrap_or(0.0).abs();
        if vmax > 0.0 && end > END_TOL * vmax {
            out.warnings.push(Warning::TailTruncation { at: w.zeta_grid.max(), magnitude: end / vmax });
        }
    }
    out.warnings.extend(w.warnings.iter().cloned());
    Ok(out)
}

/// Integral of `J_nu(k x) x^{n-1} g(x)` over `[a, inf)` by half-period panels and the epsilon algorithm.
fn oscillatory_tail(g: &dyn Fn(f64) -> f64, nu: f64, n: u32, k: f64, a: f64) -> f64 {
    let d = n as f64 - 1.0;
    let f = |x: f64| bessel_j(nu, k * x) * x.powf(d) * g(x);
    let step = PI / k;
    let mut lo = a;
    let mut partial = 0.0;
    let mut sums = Vec::new();
    let cfg = QuadConfig { rel_tol: 1e-13, ..QuadConfig::default() };
    for _ in 0..60 {
        let hi = lo + step;
        partial += integrate_breaks(&f, &[lo, hi], &cfg).value;
        sums.push(partial);
        lo = hi;
    }
    wynn_epsilon(&sums).0
}

/// Forward Hankel transform of sampled data (the closed-form transform is used when attached).
pub fn hankel_forward(u: &RadialFunction, zeta_grid: &RadialGrid) -> Result<SpectralRadialFunction> {
    if let Some(p) = &u.transform {
        let mut out = SpectralRadialFunction::from_profile(zeta_grid, u.n, p.clone());
        out.warnings = u.warnings.clone();
        return Ok(out);
    }
    let n = u.n;
    let nu = bessel_order(n);
    let (rmin, rmax) = (u.grid.min(), u.grid.max());
    let v0 = u.values[0];
    let head = u.head.clone();
    let eval = |r: f64| -> f64 {
        if r < rmin {
            head.as_ref().map(|h| h.eval(r)).unwrap_or(v0)
        } else {
            u.eval(r.min(rmax)).unwrap_or(0.0)
        }
    };
    let d = n as f64 - 1.0;
    let mut values = Vec::with_capacity(zeta_grid.len());
    for &z in zeta_grid.points() {
        let integrand = |r: f64| if r == 0.0 { 0.0 } else { bessel_reduced(nu, z * r) * r.powf(d) * eval(r) };
        let breaks = merge_breaks(oscillatory_breaks(nu, z, rmax)?, u.grid.points());
        let mut v = integrate_breaks(&integrand, &breaks, &sampled_cfg(breaks.len())).value;
        if let Some(t) = &u.tail {
            let g = |r: f64| t.eval(r);
            v += oscillatory_tail(&g, nu, n, z, rmax) * z.powf(-nu);
        }
        values.push(v);
    }
    let mut warnings = u.warnings.clone();
    if u.tail.is_none() {
        let vmax = u.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let end = u.values.last().copied().unwrap_or(0.0).abs();
        if vmax > 0.0 && end > END_TOL * vmax {
            warnings.push(Warning::TailTruncation { at: rmax, magnitude: end / vmax });
        }
    }
    Ok(SpectralRadialFunction { zeta_grid: zeta_grid.clone(), values, n, profile: None, warnings })
}

/// The Fourier-side profile of `u`: attached, or computed on the default frequency grid.
pub fn spectral_profile(u: &RadialFunction) -> Result<SpectralProfile> {
    if let Some(p) = &u.transform {
        return Ok(p.clone());
    }
    let zg = RadialGrid::default_log();
    Ok(hankel_forward(u, &zg)?.as_profile())
}

/// `(-Delta)^{a/2}`: inverse transform of `zeta^a u^`.
pub fn fractional_power(u: &RadialFunction, a: f64) -> Result<RadialFunction> {
    let profile = spectral_profile(u)?.times_power(a);
    let mut out = hankel_inverse_profile(&profile, u.n, &u.grid)?;
    if u.transform.is_none() {
        out.transform = None;
    }
    out.warnings.extend(u.warnings.iter().cloned());
    Ok(out)
}

/// Radial fractional Laplacian `(-Delta)^s u`.
pub fn fractional_laplacian(u: &RadialFunction, p: &Params) -> Result<RadialFunction> {
    check_dimension(u, p)?;
    fractional_power(u, 2.0 * p.s())
}

fn check_dimension(u: &RadialFunction, p: &Params) -> Result<()> {
    if u.n != p.n() {
        return Err(Error::InvalidParameter(format!("function tagged n = {} used with n = {}", u.n, p.n())));
    }
    Ok(())
}

fn stencil_derivative(t: &[f64], v: &[f64], idx: &[usize], at: f64) -> f64 {
    let mut d = 0.0;
    for &a in idx {
        // derivative of the Lagrange basis polynomial l_a at `at`
        let mut sum = 0.0;
        for &b in idx {
            if b == a {
                continue;
            }
            let mut prod = 1.0 / (t[a] - t[b]);
            for &c in idx {
                if c != a && c != b {
                    prod *= (at - t[c]) / (t[a] - t[c]);
                }
            }
            sum += prod;
        }
        d += sum * v[a];
    }
    d
}

/// `r d/dr` by five-point differences in `log r`, with a Richardson error estimate.
pub fn log_derivative(u: &RadialFunction) -> (Vec<f64>, f64) {
    let t: Vec<f64> = u.grid.points().iter().map(|r| r.ln()).collect();
    let n = t.len();
    let mut d = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n - 5);
        let idx: Vec<usize> = (lo..lo + 5).collect();
        d.push(stencil_derivative(&t, &u.values, &idx, t[i]));
    }
    let mut err: f64 = 0.0;
    let scale = d.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(u.values.iter().fold(0.0f64, |a, x| a.max(x.abs())));
    for i in 4..n.saturating_sub(4) {
        let idx = [i - 4, i - 2, i, i + 2, i + 4];
        let coarse = stencil_derivative(&t, &u.values, &idx, t[i]);
        err = err.max((coarse - d[i]).abs() / 15.0);
    }
    let rel = if scale > 0.0 { err / scale } else { 0.0 };
    (d, rel)
}

/// Grid-resolution warning threshold for the drift term.
const FD_TOL: f64 = 1e-7;

fn drift_combination(u: &RadialFunction, lap: RadialFunction, drift: f64, mass: f64) -> Result<RadialFunction> {
    let (du, est) = log_derivative(u);
    let values = lap.values.iter().zip(&du).zip(&u.values).map(|((l, d), v)| l + drift * d + mass * v).collect();
    let mut out = RadialFunction::new(u.grid.clone(), values, u.n)?;
    out.warnings = lap.warnings;
    if est > FD_TOL {
        out.warnings.push(Warning::GridResolution { estimate: est });
    }
    Ok(out)
}

/// `L_s u = (-Delta)^s u - (1/2s) r u' - (n/2s) u`.
pub fn apply_ls(u: &RadialFunction, p: &Params) -> Result<RadialFunction> {
    let lap = fractional_laplacian(u, p)?;
    let s = p.s();
    drift_combination(u, lap, -0.5 / s, -0.5 * p.nf() / s)
}

/// `L_s* w = (-Delta)^s w + (1/2s) r w'`.
pub fn apply_ls_star(w: &RadialFunction, p: &Params) -> Result<RadialFunction> {
    let lap = fractional_laplacian(w, p)?;
    drift_combination(w, lap, 0.5 / p.s(), 0.0)
}

fn check_profile_range(u: &RadialFunction, profile: &SpectralProfile) -> Result<()> {
    if u.transform.is_some() {
        return Ok(());
    }
    let peak = (0..64).map(|i| profile.eval(profile.cut * (i as f64 + 0.5) / 64.0).abs()).fold(0.0f64, f64::max);
    let end = profile.eval(profile.cut * (1.0 - 1e-9)).abs();
    if peak > 0.0 && end > 1e-12 * peak {
        return Err(Error::ResamplingRange { needed: f64::INFINITY, available: profile.cut });
    }
    Ok(())
}

/// Profile `theta -> u^(theta^{1/s})` of `u†`.
pub fn dagger_profile(u: &RadialFunction, p: &Params) -> Result<SpectralProfile> {
    check_dimension(u, p)?;
    let profile = spectral_profile(u)?;
    check_profile_range(u, &profile)?;
    Ok(profile.substitute_power(1.0 / p.s()))
}

/// Profile `theta -> theta^{n/s-n} w^(theta^{1/s})` of `w‡`.
pub fn ddagger_profile(w: &RadialFunction, p: &Params) -> Result<SpectralProfile> {
    check_dimension(w, p)?;
    let profile = spectral_profile(w)?;
    check_profile_range(w, &profile)?;
    let e = p.nf() / p.s() - p.nf();
    Ok(profile.substitute_power(1.0 / p.s()).times_power(e))
}

/// `u†(rho)`, sampled on the grid of `u` read as a `rho` grid.
pub fn dagger_map(u: &RadialFunction, p: &Params) -> Result<RadialFunction> {
    if p.is_local() {
        return Ok(u.clone());
    }
    let prof = dagger_profile(u, p)?;
    let mut out = hankel_inverse_profile(&prof, u.n, &u.grid)?;
    out.warnings.extend(u.warnings.iter().cloned());
    Ok(out)
}

/// `Phi_s^{-1} u(r) = (r^{2s}/4)^{n/2 - n/(2s)} u†(r^s)`.
pub fn phi_inverse_map(u: &RadialFunction, p: &Params) -> Result<RadialFunction> {
    if p.is_local() {
        return Ok(u.clone());
    }
    let prof = dagger_profile(u, p)?;
    let (s, nf) = (p.s(), p.nf());
    let e = 0.5 * nf - 0.5 * nf / s;
    let values = u
        .grid
        .points()
        .iter()
        .map(|&r| Ok((0.25 * r.powf(2.0 * s)).powf(e) * hankel_profile_at(&prof, u.n, r.powf(s))?))
        .collect::<Result<Vec<_>>>()?;
    let mut out = RadialFunction::new(u.grid.clone(), values, u.n)?;
    out.warnings = u.warnings.clone();
    Ok(out)
}

/// `w‡(rho)`, sampled on the grid of `w` read as a `rho` grid.
pub fn ddagger_map(w: &RadialFunction, p: &Params) -> Result<RadialFunction> {
    if p.is_local() {
        return Ok(w.clone());
    }
    let prof = ddagger_profile(w, p)?;
    let mut out = hankel_inverse_profile(&prof, w.n, &w.grid)?;
    divergence_check(&prof, w.n, &mut out.warnings);
    out.warnings.extend(w.warnings.iter().cloned());
    Ok(out)
}

/// `(Phi_s*)^{-1} w(r) = w‡(r^s)`.
pub fn phi_star_inverse_map(w: &RadialFunction, p: &Params) -> Result<RadialFunction> {
    if p.is_local() {
        return Ok(w.clone());
    }
    let prof = ddagger_profile(w, p)?;
    let values = w.grid.points().iter().map(|&r| hankel_profile_at(&prof, w.n, r.powf(p.s()))).collect::<Result<Vec<_>>>()?;
    let mut out = RadialFunction::new(w.grid.clone(), values, w.n)?;
    divergence_check(&prof, w.n, &mut out.warnings);
    Ok(out)
}

fn divergence_check(prof: &SpectralProfile, n: u32, warnings: &mut Vec<Warning>) {
    let d = n as f64 - 1.0;
    let g = |z: f64| prof.eval(z).abs() * z.powf(d);
    let peak = (1..=64).map(|i| g(prof.cut * i as f64 / 64.0)).fold(0.0f64, f64::max);
    let end = g(prof.cut);
    if peak > 0.0 && end > END_TOL * peak {
        warnings.push(Warning::Divergence { end: "upper", magnitude: end / peak });
    }
}

/// Values of `u†` at arbitrary `rho`.
pub trait DaggerEval {
    fn dagger_at(&self, p: &Params, rho: &[f64]) -> Result<Vec<f64>>;
}

/// Values of `w‡` at arbitrary `rho`.
pub trait DdaggerEval {
    fn ddagger_at(&self, p: &Params, rho: &[f64]) -> Result<Vec<f64>>;
}

impl DaggerEval for RadialFunction {
    fn dagger_at(&self, p: &Params, rho: &[f64]) -> Result<Vec<f64>> {
        if p.is_local() && self.transform.as_ref().map_or(true, |t| t.knots.is_some()) {
            return rho.iter().map(|&x| self.eval_or_zero(x)).collect();
        }
        let prof = if p.is_local() { spectral_profile(self)? } else { dagger_profile(self, p)? };
        rho.iter().map(|&x| hankel_profile_at(&prof, self.n, x)).collect()
    }
}

impl DdaggerEval for RadialFunction {
    fn ddagger_at(&self, p: &Params, rho: &[f64]) -> Result<Vec<f64>> {
        let prof = if p.is_local() { spectral_profile(self)? } else { ddagger_profile(self, p)? };
        rho.iter().map(|&x| hankel_profile_at(&prof, self.n, x)).collect()
    }
}

/// Profile of `e^{-a r^2}`: `(2a)^{-n/2} e^{-zeta^2/(4a)}`, with its small-`zeta` series.
pub fn gaussian_profile(n: u32, a: f64) -> SpectralProfile {
    let c = (2.0 * a).powf(-0.5 * n as f64);
    let mut terms = Vec::with_capacity(64);
    let mut coeff = c;
    for k in 0..64 {
        if k > 0 {
            coeff *= -1.0 / (4.0 * a * k as f64);
        }
        terms.push((2.0 * k as f64, coeff));
    }
    SpectralProfile::new(move |z| c * (-z * z / (4.0 * a)).exp(), (4.0 * a * 45.0f64).sqrt(), PowerSeries::new(terms))
}

/// `e^{-a r^2}` sampled on a grid with its transform and small-`r` series attached.
pub fn gaussian(grid: &RadialGrid, n: u32, a: f64) -> Result<RadialFunction> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("Gaussian width parameter {a}")));
    }
    let mut head = Vec::new();
    let mut coeff = 1.0;
    for k in 0..8 {
        if k > 0 {
            coeff *= -a / k as f64;
        }
        head.push((2.0 * k as f64, coeff));
    }
    Ok(RadialFunction::from_fn(grid, n, |r| (-a * r * r).exp())?.with_transform(gaussian_profile(n, a)).with_head(PowerSeries::new(head)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::laguerre;
    use approx::assert_relative_eq;

    fn gaussian_profile(n: u32, a: f64) -> SpectralProfile {
        // F{e^{-a r^2}} = (2a)^{-n/2} e^{-zeta^2/(4a)}
        let c = (2.0 * a).powf(-0.5 * n as f64);
        SpectralProfile::new(move |z| c * (-z * z / (4.0 * a)).exp(), (4.0 * a * 45.0f64).sqrt(), PowerSeries::default())
    }

    #[test]
    fn gaussian_is_self_dual() {
        let prof = gaussian_profile(3, 0.5);
        for r in [0.0, 0.3, 1.0, 2.5, 6.0] {
            let v = hankel_profile_at(&prof, 3, r).unwrap();
            assert!((v - (-r * r / 2.0).exp()).abs() < 1e-13, "r={r} v={v}");
        }
    }

    #[test]
    fn laguerre_gaussian_integral() {
        // r^{-nu} int zeta^{2k+n/2} e^{-zeta^2} J_nu(r zeta) = 2^{-n/2} k! e^{-r^2/4} L_k^{(nu)}(r^2/4)
        let (n, k) = (2u32, 3i32);
        let prof = SpectralProfile::new(move |z| z.powi(2 * k) * (-z * z).exp(), 7.5, PowerSeries::default());
        for r in [0.5, 2.0, 5.0] {
            let v = hankel_profile_at(&prof, n, r).unwrap();
            let x = r * r / 4.0;
            let exact = 0.5 * 6.0 * (-x).exp() * laguerre(3, 0.0, x);
            assert!((v - exact).abs() < 1e-12, "r={r} {v} {exact}");
        }
    }

    #[test]
    fn one_dimension_is_cosine_transform() {
        let prof = SpectralProfile::new(|z| (-z).exp(), 45.0, PowerSeries::default());
        for r in [0.2, 1.0, 3.0] {
            let v = hankel_profile_at(&prof, 1, r).unwrap();
            let exact = (2.0 / PI).sqrt() / (1.0 + r * r);
            assert_relative_eq!(v, exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn tail_expansion_matches_quadrature() {
        // zeta^{0.6} e^{-zeta^{0.6}} has a convergent large-r expansion
        let s = 0.3;
        let mut terms = Vec::new();
        let mut c = 1.0;
        for m in 0..60 {
            terms.push((2.0 * s * (1.0 + m as f64), c));
            c *= -1.0 / (m as f64 + 1.0);
        }
        let f = move |z: f64| z.powf(2.0 * s) * (-z.powf(2.0 * s)).exp();
        let prof = SpectralProfile::new(f, 700.0, PowerSeries::new(terms));
        let r = 8.0;
        let series = tail_sum(&tail_terms(&prof, 2).unwrap(), r).expect("converged");
        let bare = SpectralProfile::new(f, 700.0, PowerSeries::default());
        let quad = hankel_profile_at(&bare, 2, r).unwrap();
        assert!((series - quad).abs() < 1e-9 * series.abs(), "{series} {quad}");
    }

    #[test]
    fn sampled_round_trip() {
        for n in [1u32, 2, 3] {
            let rg = RadialGrid::log(1e-3, 12.0, 700).unwrap();
            let u = RadialFunction::from_fn(&rg, n, |r| (-r * r).exp() * (1.0 + r * r)).unwrap();
            let zg = RadialGrid::log(1e-3, 14.0, 600).unwrap();
            let w = hankel_forward(&u, &zg).unwrap();
            let back = hankel_inverse(&w, &rg).unwrap();
            for (i, &r) in rg.points().iter().enumerate().step_by(37) {
                if r > 6.0 {
                    break;
                }
                assert!((back.values[i] - u.values[i]).abs() < 1e-6, "n={n} r={r} {} {}", back.values[i], u.values[i]);
            }
        }
    }

    #[test]
    fn local_laplacian_matches_finite_differences() {
        let p = Params::new(1.0, 3).unwrap();
        let rg = RadialGrid::log(1e-2, 8.0, 500).unwrap();
        let u = RadialFunction::from_fn(&rg, 3, |r| (-r * r).exp()).unwrap().with_transform(gaussian_profile(3, 1.0));
        let lap = fractional_laplacian(&u, &p).unwrap();
        for (i, &r) in rg.points().iter().enumerate().step_by(23) {
            // -u'' - (n-1)/r u' for e^{-r^2}
            let exact = (6.0 - 4.0 * r * r) * (-r * r).exp();
            assert!((lap.values[i] - exact).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn stationary_gaussian_is_in_kernel() {
        let p = Params::new(1.0, 3).unwrap();
        let rg = RadialGrid::log(1e-2, 12.0, 1500).unwrap();
        let u = RadialFunction::from_fn(&rg, 3, |r| (-r * r / 4.0).exp()).unwrap().with_transform(gaussian_profile(3, 0.25));
        let l = apply_ls(&u, &p).unwrap();
        let m = l.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(m < 1e-7, "{m}");
    }

    #[test]
    fn local_maps_are_identities() {
        let p = Params::new(1.0, 2).unwrap();
        let rg = RadialGrid::log(1e-2, 5.0, 64).unwrap();
        let u = RadialFunction::from_fn(&rg, 2, |r| (-r).exp()).unwrap();
        assert_eq!(dagger_map(&u, &p).unwrap().values, u.values);
        assert_eq!(ddagger_map(&u, &p).unwrap().values, u.values);
        assert_eq!(phi_inverse_map(&u, &p).unwrap().values, u.values);
    }

    #[test]
    fn log_derivative_accuracy() {
        let rg = RadialGrid::log(1e-2, 10.0, 2000).unwrap();
        let u = RadialFunction::from_fn(&rg, 2, |r| (-r * r).exp()).unwrap();
        let (d, est) = log_derivative(&u);
        for (i, &r) in rg.points().iter().enumerate() {
            assert!((d[i] + 2.0 * r * r * (-r * r).exp()).abs() < 1e-7);
        }
        assert!(est < 1e-7);
    }
}
