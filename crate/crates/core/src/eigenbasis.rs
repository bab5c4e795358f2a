//! Fractional eigenfunctions `e_nu` of `L_s` in Fourier, series and Mellin
//! representations, the functions `U_nu`, the polynomials behind the adjoint family
//! `omega_k`, the `†` and `‡` inner products, the duality pairing and the kernel `K_s`.
//!
//! Normalization: the canonical eigenfunction has transform `zeta^{2 s nu} e^{-zeta^{2s}}`.
//! The Mellin-normalized `u_nu` equals `2^{n/2+1} s e_nu`.

use crate::error::{Error, Result};
use crate::mellin::{eigen_mellin, inverse_mellin_at, residue_inverse_i, MellinLineSamples, VerticalLine};
use crate::params::Params;
use crate::quad::gauss_legendre;
use crate::radial::{PowerSeries, RadialFunction, RadialGrid, SpectralProfile};
use crate::radial_transforms::{apply_ls, hankel_profile_at, hankel_quadrature_at, power_transform_coefficient, DaggerEval, DdaggerEval};
use crate::specfun::{
    bessel_i_scaled, fox_wright_1psi1_accurate, fox_wright_1psi1_detail, gamma_real, gauss_2f1, kummer_m, laguerre, log_gamma, rgamma_real,
    PrecisionPolicy, POLE_GUARD,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

/// Relative error target of the large-`r` series for `s < 1/2`.
pub const PUISEUX_TOL: f64 = 1e-10;
/// Largest tolerated cancellation of the small-`r` series for `s > 1/2`.
const SERIES_COND: f64 = 1e-12;
/// Terms kept in the small-`zeta` expansion of an eigenprofile.
const PROFILE_TERMS: usize = 150;
/// Abscissa used for `Re z = 0+` in the residue formula.
const SIGMA_ZERO: f64 = 1e-9;

fn is_exact(x: f64, v: f64) -> bool {
    (x - v).abs() < 1e-15
}

fn nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < POLE_GUARD
}

fn check_index(p: &Params, nu: f64) -> Result<()> {
    if !nu.is_finite() || !(nu > -p.nf() / (2.0 * p.s())) {
        return Err(Error::InvalidParameter(format!("spectral index nu = {nu} must exceed -n/(2s) = {}", -p.nf() / (2.0 * p.s()))));
    }
    Ok(())
}

/// `2^{n/2+1} s`, the ratio `u_nu / e_nu`.
pub fn mellin_normalization(p: &Params) -> f64 {
    2f64.powf(0.5 * p.nf() + 1.0) * p.s()
}

/// Canonical Fourier-side eigenfunction `zeta^{2 s nu} e^{-zeta^{2s}}`.
pub fn eigen_fourier(p: &Params, nu: f64, zeta: f64) -> f64 {
    if zeta == 0.0 {
        return if nu > 0.0 {
            0.0
        } else if nu == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
    }
    let x = zeta.powf(2.0 * p.s());
    if nu == 0.0 {
        (-x).exp()
    } else {
        (nu * x.ln() - x).exp()
    }
}

/// Canonical eigenprofile with its small-`zeta` expansion.
pub fn eigen_profile(p: &Params, nu: f64) -> SpectralProfile {
    let s = p.s();
    let peak = if nu > 0.0 { nu * nu.ln() - nu } else { 0.0 };
    let mut x = nu.max(1.0);
    while nu * x.ln() - x > peak - 48.0 {
        x *= 1.1;
    }
    let cut = x.powf(0.5 / s);
    let mut terms = Vec::with_capacity(PROFILE_TERMS);
    let mut c = 1.0;
    for m in 0..PROFILE_TERMS {
        if m > 0 {
            c *= -1.0 / m as f64;
        }
        terms.push((2.0 * s * (nu + m as f64), c));
    }
    let q = *p;
    SpectralProfile::new(move |z| eigen_fourier(&q, nu, z), cut, PowerSeries::new(terms))
}

/// Canonical `e_nu(0) = Gamma(nu + n/(2s)) / (s 2^{n/2} Gamma(n/2))`.
pub fn eigen_at_origin(p: &Params, nu: f64) -> Result<f64> {
    let (s, n) = (p.s(), p.nf());
    Ok(gamma_real(nu + 0.5 * n / s)? / (s * 2f64.powf(0.5 * n) * gamma_real(0.5 * n)?))
}

/// Value of an explicit formula together with the factor converting it to the
/// canonical normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub to_canonical: f64,
    pub condition_error: f64,
}

impl SeriesValue {
    pub fn canonical(&self) -> f64 {
        self.value * self.to_canonical
    }
}

/// `u_nu(r) = 2 1Psi1[(nu + n/(2s), 1/s); (n/2, 1); -r^2/4]`, the small-`r` series for `s >= 1/2`,
/// summed in extended precision when double precision cancels. At `s = 1/2` it converges only for `r < 1`.
pub fn eigen_series_raw(p: &Params, nu: f64, r: f64) -> Result<SeriesValue> {
    check_index(p, nu)?;
    let (s, n) = (p.s(), p.nf());
    if s < 0.5 {
        return Err(Error::OutOfRegime {
            reason: format!("small-r series diverges for s = {s} < 1/2"),
            advice: "use eigen_series (large-r form) or the Fourier route".into(),
        });
    }
    let d = fox_wright_1psi1_accurate(nu + 0.5 * n / s, 1.0 / s, 0.5 * n, 1.0, -0.25 * r * r, SERIES_COND, &PrecisionPolicy::default())?;
    Ok(SeriesValue { value: 2.0 * d.value, to_canonical: 1.0 / mellin_normalization(p), condition_error: d.condition_error() })
}

fn puiseux_detail(p: &Params, nu: f64, r: f64) -> Result<SeriesValue> {
    let (s, n) = (p.s(), p.nf());
    let y = 2.0 / r;
    let d = fox_wright_1psi1_detail(s * nu + 0.5 * n, s, -s * nu, -s, -y.powf(2.0 * s), &PrecisionPolicy::default())?;
    Ok(SeriesValue {
        value: 2.0 * s * y.powf(n + 2.0 * s * nu) * d.value,
        to_canonical: 1.0 / mellin_normalization(p),
        condition_error: d.condition_error(),
    })
}

/// Explicit eigenfunction formulas.
///
/// * `s > 1/2`: Fox-Wright series in `-r^2/4` (Kummer form at `s = 1`).
/// * `s = 1/2`: `2^{1-n/2} Gamma(n+nu)/Gamma(n/2) 2F1((n+nu)/2, (n+nu+1)/2; n/2; -r^2)`, already canonical.
/// * `s < 1/2`: `2s (2/r)^{n+2s nu} 1Psi1[(s nu + n/2, s); (-s nu, -s); -(2/r)^{2s}]`, accepted once its
///   cancellation estimate is below [`PUISEUX_TOL`].
pub fn eigen_series(p: &Params, nu: f64, r: f64) -> Result<SeriesValue> {
    check_index(p, nu)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius {r}")));
    }
    let (s, n) = (p.s(), p.nf());
    let pol = PrecisionPolicy::default();
    if p.is_local() {
        let c = 2.0 * gamma_real(nu + 0.5 * n)? / gamma_real(0.5 * n)?;
        let v = c * kummer_m(nu + 0.5 * n, 0.5 * n, -0.25 * r * r, &pol)?;
        return Ok(SeriesValue { value: v, to_canonical: 1.0 / mellin_normalization(p), condition_error: 0.0 });
    }
    if is_exact(s, 0.5) {
        let c = 2f64.powf(1.0 - 0.5 * n) * gamma_real(n + nu)? / gamma_real(0.5 * n)?;
        let f = gauss_2f1(0.5 * (n + nu), 0.5 * (n + nu + 1.0), 0.5 * n, -r * r, &pol)?;
        return Ok(SeriesValue { value: c * f, to_canonical: 1.0, condition_error: 0.0 });
    }
    if s > 0.5 {
        return eigen_series_raw(p, nu, r);
    }
    if r == 0.0 {
        return Err(Error::OutOfRegime {
            reason: "large-r series evaluated at r = 0".into(),
            advice: "use the Fourier (Hankel) route below the series threshold".into(),
        });
    }
    let v = puiseux_detail(p, nu, r);
    match v {
        Ok(v) if v.condition_error <= PUISEUX_TOL => Ok(v),
        Ok(v) => Err(Error::OutOfRegime {
            reason: format!("large-r series at r = {r} has estimated error {:.2e}", v.condition_error),
            advice: "use the Fourier (Hankel) route below the series threshold".into(),
        }),
        Err(e) => Err(Error::OutOfRegime {
            reason: format!("large-r series at r = {r} failed: {e}"),
            advice: "use the Fourier (Hankel) route below the series threshold".into(),
        }),
    }
}

/// Smallest `r` at which the large-`r` series for `s < 1/2` meets [`PUISEUX_TOL`].
pub fn puiseux_threshold(p: &Params, nu: f64) -> Result<f64> {
    check_index(p, nu)?;
    if p.s() >= 0.5 {
        return Err(Error::InvalidParameter("the large-r series is used only for s < 1/2".into()));
    }
    let ok = |r: f64| matches!(puiseux_detail(p, nu, r), Ok(v) if v.condition_error <= PUISEUX_TOL);
    let (mut lo, mut hi) = (1e-3f64, 1e4f64);
    if ok(lo) {
        return Ok(lo);
    }
    if !ok(hi) {
        return Err(Error::NonConvergence { terms: 0, context: "no series threshold below r = 1e4".into() });
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo < 1.0 + 1e-6 {
            break;
        }
    }
    Ok(hi)
}

/// `U_nu(r) = 2s rho^{n/2 - n/(2s)} I_{0+, nu, n/2}(rho)` with `rho = r^{2s}/4`.
pub fn u_nu(p: &Params, nu: f64, r: f64) -> Result<f64> {
    let (s, n) = (p.s(), p.nf());
    if nonpositive_integer(nu + 0.5 * n) {
        return Err(Error::InvalidParameter(format!("degenerate U_nu: nu + n/2 = {} is a non-positive integer", nu + 0.5 * n)));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("U_nu needs r > 0, got {r}")));
    }
    let rho = 0.25 * r.powf(2.0 * s);
    Ok(2.0 * s * rho.powf(0.5 * n - 0.5 * n / s) * residue_inverse_i(SIGMA_ZERO, nu, 0.5 * n, rho)?)
}

/// `script L_k(r) = 2s k! rho^{n/2 - n/(2s)} e^{-rho} L_k^{((n-2)/2)}(rho)`, `rho = r^{2s}/4`.
pub fn script_l(p: &Params, k: usize, r: f64) -> f64 {
    let (s, n) = (p.s(), p.nf());
    let rho = 0.25 * r.powf(2.0 * s);
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    2.0 * s * fact * rho.powf(0.5 * n - 0.5 * n / s) * (-rho).exp() * laguerre(k, 0.5 * n - 1.0, rho)
}

/// `frak L_k(r) = 2s / Gamma(k + n/2) L_k^{((n-2)/2)}(r^{2s}/4)`.
pub fn frak_l(p: &Params, k: usize, r: f64) -> f64 {
    let (s, n) = (p.s(), p.nf());
    2.0 * s * rgamma_real(k as f64 + 0.5 * n) * laguerre(k, 0.5 * n - 1.0, 0.25 * r.powf(2.0 * s))
}

/// Representation used to evaluate an eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Inverse Hankel quadrature of the Fourier profile.
    Fourier,
    /// Explicit special-function formulas.
    Series,
    /// Numerical inversion of the Mellin transform along a vertical line.
    MellinResidue,
    /// Closed forms and series where accurate, quadrature elsewhere.
    Auto,
}

/// Scaling convention of an eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Transform `zeta^{2 s nu} e^{-zeta^{2s}}`.
    Canonical,
    /// `u_nu = 2^{n/2+1} s e_nu`, the function with Mellin transform `eigen_mellin`.
    MellinU,
}

/// The eigenfunction `e_nu` of `L_s` with eigenvalue `nu`.
#[derive(Debug)]
pub struct EigenFunction {
    params: Params,
    nu: f64,
    route: Route,
    normalization: Normalization,
    profile: SpectralProfile,
    threshold: OnceLock<Option<f64>>,
}

impl Clone for EigenFunction {
    fn clone(&self) -> Self {
        Self {
            params: self.params,
            nu: self.nu,
            route: self.route,
            normalization: self.normalization,
            profile: self.profile.clone(),
            threshold: self.threshold.clone(),
        }
    }
}

impl EigenFunction {
    pub fn new(p: Params, nu: f64) -> Result<Self> {
        check_index(&p, nu)?;
        Ok(Self {
            params: p,
            nu,
            route: Route::Auto,
            normalization: Normalization::Canonical,
            profile: eigen_profile(&p, nu),
            threshold: OnceLock::new(),
        })
    }

    /// Basis member `e_k`.
    pub fn basis(p: Params, k: usize) -> Self {
        Self::new(p, k as f64).expect("non-negative index")
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Factor applied to the canonical eigenfunction.
    pub fn scale(&self) -> f64 {
        match self.normalization {
            Normalization::Canonical => 1.0,
            Normalization::MellinU => mellin_normalization(&self.params),
        }
    }

    /// Fourier-side profile in the chosen normalization.
    pub fn profile(&self) -> SpectralProfile {
        let k = self.scale();
        if k == 1.0 {
            self.profile.clone()
        } else {
            self.profile.scale(k)
        }
    }

    pub fn fourier(&self, zeta: f64) -> f64 {
        self.scale() * eigen_fourier(&self.params, self.nu, zeta)
    }

    /// Mellin transform in the chosen normalization.
    pub fn mellin(&self, z: Complex64) -> Result<Complex64> {
        Ok(eigen_mellin(&self.params, self.nu, z)? * (self.scale() / mellin_normalization(&self.params)))
    }

    /// Inversion abscissa `0.5 min(1, s nu + n/2)` inside the strip `0 < Re z < n + 2 s nu`.
    pub fn mellin_sigma(&self) -> f64 {
        0.5 * (self.params.s() * self.nu + 0.5 * self.params.nf()).min(1.0)
    }

    /// Threshold of the large-`r` series (only for `s < 1/2`).
    pub fn series_threshold(&self) -> Option<f64> {
        *self.threshold.get_or_init(|| puiseux_threshold(&self.params, self.nu).ok())
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        self.eval_route(self.route, r)
    }

    /// Evaluation through a specific representation.
    pub fn eval_route(&self, route: Route, r: f64) -> Result<f64> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("radius {r}")));
        }
        let k = self.scale();
        let v = match route {
            Route::Fourier => hankel_quadrature_at(&self.profile, self.params.n(), r)?,
            Route::Series => eigen_series(&self.params, self.nu, r)?.canonical(),
            Route::MellinResidue => self.mellin_values(&[r])?[0],
            Route::Auto => self.eval_auto(r)?,
        };
        Ok(k * v)
    }

    fn eval_auto(&self, r: f64) -> Result<f64> {
        let (p, nu) = (&self.params, self.nu);
        if r == 0.0 {
            return eigen_at_origin(p, nu);
        }
        let s = p.s();
        if p.is_local() {
            if nu >= 0.0 && nu.fract() == 0.0 {
                let k = nu as usize;
                let fact: f64 = (1..=k).map(|j| j as f64).product();
                let x = 0.25 * r * r;
                return Ok(2f64.powf(-0.5 * p.nf()) * fact * laguerre(k, 0.5 * p.nf() - 1.0, x) * (-x).exp());
            }
            return Ok(eigen_series(p, nu, r)?.canonical());
        }
        if is_exact(s, 0.5) {
            return Ok(eigen_series(p, nu, r)?.canonical());
        }
        if s > 0.5 {
            let pol = PrecisionPolicy::default();
            let n = p.nf();
            if let Ok(d) = fox_wright_1psi1_detail(nu + 0.5 * n / s, 1.0 / s, 0.5 * n, 1.0, -0.25 * r * r, &pol) {
                if d.condition_error() <= SERIES_COND {
                    return Ok(2.0 * d.value / mellin_normalization(p));
                }
            }
            return hankel_profile_at(&self.profile, p.n(), r);
        }
        match self.series_threshold() {
            Some(t) if r >= t => Ok(puiseux_detail(p, nu, r)?.canonical()),
            _ => hankel_profile_at(&self.profile, p.n(), r),
        }
    }

    /// Line samples of the canonical Mellin transform, extended until negligible.
    pub fn mellin_samples(&self, step: f64) -> Result<MellinLineSamples> {
        let sigma = self.mellin_sigma();
        let f = |l: f64| eigen_mellin(&self.params, self.nu, Complex64::new(sigma, l));
        let peak = f(0.0)?.norm();
        let mut lmax = 0.0;
        let mut quiet = 0;
        let mut k = 1usize;
        while quiet < 20 {
            let l = step * k as f64;
            let m = f(l)?.norm().max(f(-l)?.norm());
            if m < 1e-18 * peak {
                quiet += 1;
            } else {
                quiet = 0;
                lmax = l;
            }
            k += 1;
            if k > 1_000_000 {
                return Err(Error::InsufficientDecay("eigen Mellin transform does not decay".into()));
            }
        }
        let count = 2 * ((lmax / step).ceil() as usize + 20) + 1;
        let half = (count / 2) as f64 * step;
        let line = VerticalLine::uniform(sigma, half, count)?;
        let c = 1.0 / mellin_normalization(&self.params);
        MellinLineSamples::from_fn(line, |z| Ok(eigen_mellin(&self.params, self.nu, z)? * c))
    }

    fn mellin_values(&self, r: &[f64]) -> Result<Vec<f64>> {
        let samples = self.mellin_samples(0.05)?;
        Ok(inverse_mellin_at(&samples, r)?.0)
    }

    /// Samples on a grid with transform, small-`r` series and truncated large-`r` series attached.
    pub fn sample(&self, grid: &RadialGrid) -> Result<RadialFunction> {
        let values = match self.route {
            Route::MellinResidue => {
                let k = self.scale();
                self.mellin_values(grid.points())?.into_iter().map(|v| v * k).collect()
            }
            route => grid.points().par_iter().map(|&r| self.eval_route(route, r)).collect::<Result<Vec<_>>>()?,
        };
        let mut out = RadialFunction::new(grid.clone(), values, self.params.n())?.with_transform(self.profile());
        out.head = Some(self.head_series(3)?);
        out.tail = self.tail_series_at(grid.max());
        Ok(out)
    }

    /// `sum_m (-1)^m mu_m r^{2m} / (2^{2m+n/2-1} m! Gamma(m+n/2))` with analytic moments.
    pub fn head_series(&self, terms: usize) -> Result<PowerSeries> {
        let (s, n) = (self.params.s(), self.params.nf());
        let mut out = Vec::with_capacity(terms);
        for m in 0..terms {
            let mf = m as f64;
            let ln_mu = log_gamma(Complex64::new((2.0 * mf + n + 2.0 * s * self.nu) / (2.0 * s), 0.0))?.re - (2.0 * s).ln();
            let ln_den = (2.0 * mf + 0.5 * n - 1.0) * LN_2
                + log_gamma(Complex64::new(mf + 1.0, 0.0))?.re
                + log_gamma(Complex64::new(mf + 0.5 * n, 0.0))?.re;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            out.push((2.0 * mf, sign * self.scale() * (ln_mu - ln_den).exp()));
        }
        Ok(PowerSeries::new(out))
    }

    /// Large-`r` expansion truncated at its smallest term at `r`.
    pub fn tail_series_at(&self, r: f64) -> Option<PowerSeries> {
        let n = self.params.n();
        let mut terms = Vec::new();
        let mut last = f64::INFINITY;
        for &(p, c) in &self.profile.small.terms {
            let a = power_transform_coefficient(n, p)?;
            if a == 0.0 {
                continue;
            }
            let coeff = self.scale() * c * a;
            let mag = (coeff * r.powf(-(n as f64) - p)).abs();
            if mag > last {
                break;
            }
            last = mag;
            terms.push((-(n as f64) - p, coeff));
        }
        if terms.is_empty() {
            None
        } else {
            Some(PowerSeries::new(terms))
        }
    }
}

/// `e_nu†` is the local (`s = 1`) eigenfunction with the same `nu`.
impl DaggerEval for EigenFunction {
    fn dagger_at(&self, p: &Params, rho: &[f64]) -> Result<Vec<f64>> {
        if p != &self.params {
            return Err(Error::InvalidParameter("dagger map with mismatched parameters".into()));
        }
        let local = EigenFunction::new(Params::new(1.0, p.n())?, self.nu)?;
        let c = self.scale() / local.scale();
        rho.iter().map(|&x| Ok(c * local.eval_auto(x)?)).collect()
    }
}

/// The adjoint eigenfunction `omega_k`, represented through `omega_k‡(rho) = frak L_k(rho^{1/s})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointEigenFunction {
    pub params: Params,
    pub k: usize,
}

impl AdjointEigenFunction {
    pub fn new(params: Params, k: usize) -> Self {
        Self { params, k }
    }

    /// `omega_k‡(rho) = (2s / Gamma(k+n/2)) L_k^{((n-2)/2)}(rho^2/4)`.
    pub fn ddagger(&self, rho: f64) -> f64 {
        let (s, n) = (self.params.s(), self.params.nf());
        2.0 * s * rgamma_real(self.k as f64 + 0.5 * n) * laguerre(self.k, 0.5 * n - 1.0, 0.25 * rho * rho)
    }
}

impl DdaggerEval for AdjointEigenFunction {
    fn ddagger_at(&self, p: &Params, rho: &[f64]) -> Result<Vec<f64>> {
        if p != &self.params {
            return Err(Error::InvalidParameter("ddagger map with mismatched parameters".into()));
        }
        Ok(rho.iter().map(|&x| self.ddagger(x)).collect())
    }
}

/// Panel width and order of the `rho` quadrature.
const RHO_PANEL: f64 = 0.5;
const RHO_ORDER: usize = 16;
const RHO_MAX: f64 = 40.0;
/// Relative size of a panel below which the `rho` integral is considered converged.
const RHO_TOL: f64 = 1e-16;
/// Past `RHO_MAX` decaying integrands continue on panels of width `RHO_GROWTH rho` up to `RHO_EXTENDED`.
const RHO_GROWTH: f64 = 0.25;
const RHO_EXTENDED: f64 = 1e5;
/// Last-panel share accepted when `RHO_EXTENDED` is reached without growth.
const RHO_ACCEPT: f64 = 1e-11;

type Batch<'a> = Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a>;

/// `int_0^inf f_i(rho) f_j(rho) w(rho) rho^{n-1} d rho` for all pairs, panel by panel, stopping once
/// every diagonal has converged. A run of growing panels past `rho = 8` means the weight wins.
fn rho_gram(fs: &[Batch<'_>], gs: &[Batch<'_>], weight: &dyn Fn(f64) -> f64, n: u32) -> Result<Vec<Vec<f64>>> {
    let (gx, gw) = gauss_legendre(RHO_ORDER);
    let (m1, m2) = (fs.len(), gs.len());
    let mut acc = vec![vec![0.0; m2]; m1];
    let mut abs_diag = vec![0.0f64; m1.max(m2)];
    let mut prev = f64::INFINITY;
    let mut growing = 0;
    let mut last = f64::INFINITY;
    let d = n as f64 - 1.0;
    let mut a = 0.0;
    while a < RHO_EXTENDED {
        if a >= RHO_MAX && growing > 0 {
            break;
        }
        let h = if a < RHO_MAX { RHO_PANEL } else { RHO_GROWTH * a };
        let b = a + h;
        let nodes: Vec<f64> = gx.iter().map(|x| a + 0.5 * h * (x + 1.0)).collect();
        let w: Vec<f64> = nodes.iter().zip(&gw).map(|(r, g)| 0.5 * h * g * weight(*r) * r.powf(d)).collect();
        let fv = fs.iter().map(|f| f(&nodes)).collect::<Result<Vec<_>>>()?;
        let gv = gs.iter().map(|g| g(&nodes)).collect::<Result<Vec<_>>>()?;
        let mut panel_max = 0.0f64;
        let mut total_max = 0.0f64;
        for i in 0..m1 {
            for j in 0..m2 {
                let c: f64 = (0..RHO_ORDER).map(|q| w[q] * fv[i][q] * gv[j][q]).sum();
                let ca: f64 = (0..RHO_ORDER).map(|q| (w[q] * fv[i][q] * gv[j][q]).abs()).sum();
                acc[i][j] += c;
                let idx = i.max(j);
                abs_diag[idx] += ca;
                panel_max = panel_max.max(ca);
            }
        }
        for v in &abs_diag {
            total_max = total_max.max(*v);
        }
        if a >= 4.0 && panel_max <= RHO_TOL * total_max {
            return Ok(acc);
        }
        let density = panel_max / h;
        if a >= 8.0 && density > prev {
            growing += 1;
            if growing >= 3 {
                return Err(Error::WeightOverflow { at: b, ratio: density / prev });
            }
        } else {
            growing = 0;
        }
        prev = density;
        last = panel_max;
        a = b;
    }
    let total = abs_diag.iter().fold(0.0f64, |m, v| m.max(*v));
    if growing == 0 && last <= RHO_ACCEPT * total {
        return Ok(acc);
    }
    Err(Error::WeightOverflow { at: a, ratio: last / total })
}

fn dagger_batch<'a>(u: &'a dyn DaggerEval, p: &'a Params) -> Batch<'a> {
    Box::new(move |x: &[f64]| u.dagger_at(p, x))
}

fn ddagger_batch<'a>(w: &'a dyn DdaggerEval, p: &'a Params) -> Batch<'a> {
    Box::new(move |x: &[f64]| w.ddagger_at(p, x))
}

/// `4^{n/s - n} / s`, the constant of the `†` product in the variable `rho = r^s`.
pub fn dagger_constant(p: &Params) -> f64 {
    4f64.powf(p.nf() / p.s() - p.nf()) / p.s()
}

/// `<u1, u2>_† = (4^{n/s-n}/s) int u1†(rho) u2†(rho) e^{rho^2/4} rho^{n-1} d rho`.
pub fn inner_dagger(u1: &dyn DaggerEval, u2: &dyn DaggerEval, p: &Params) -> Result<f64> {
    Ok(gram_dagger(&[u1], &[u2], p)?[0][0])
}

/// Matrix of `†` products between two families.
pub fn gram_dagger(a: &[&dyn DaggerEval], b: &[&dyn DaggerEval], p: &Params) -> Result<Vec<Vec<f64>>> {
    let fs: Vec<Batch<'_>> = a.iter().map(|u| dagger_batch(*u, p)).collect();
    let gs: Vec<Batch<'_>> = b.iter().map(|u| dagger_batch(*u, p)).collect();
    let c = dagger_constant(p);
    let g = rho_gram(&fs, &gs, &|r| (0.25 * r * r).exp(), p.n())?;
    Ok(g.into_iter().map(|row| row.into_iter().map(|v| c * v).collect()).collect())
}

/// `<w1, w2>_‡ = (1/s) int w1‡(rho) w2‡(rho) e^{-rho^2/4} rho^{n-1} d rho`.
pub fn inner_ddagger(w1: &dyn DdaggerEval, w2: &dyn DdaggerEval, p: &Params) -> Result<f64> {
    Ok(gram_ddagger(&[w1], &[w2], p)?[0][0])
}

/// Matrix of `‡` products between two families.
pub fn gram_ddagger(a: &[&dyn DdaggerEval], b: &[&dyn DdaggerEval], p: &Params) -> Result<Vec<Vec<f64>>> {
    let fs: Vec<Batch<'_>> = a.iter().map(|w| ddagger_batch(*w, p)).collect();
    let gs: Vec<Batch<'_>> = b.iter().map(|w| ddagger_batch(*w, p)).collect();
    let c = 1.0 / p.s();
    let g = rho_gram(&fs, &gs, &|r| (-0.25 * r * r).exp(), p.n())?;
    Ok(g.into_iter().map(|row| row.into_iter().map(|v| c * v).collect()).collect())
}

/// Route (a) of the pairing: `(4^{n/(2s)-n/2}/s) int u†(rho) w‡(rho) rho^{n-1} d rho`.
pub fn duality_pairing_dual(u: &dyn DaggerEval, w: &dyn DdaggerEval, p: &Params) -> Result<f64> {
    Ok(gram_duality(&[u], &[w], p)?[0][0])
}

/// Matrix of route (a) pairings.
pub fn gram_duality(a: &[&dyn DaggerEval], b: &[&dyn DdaggerEval], p: &Params) -> Result<Vec<Vec<f64>>> {
    let fs: Vec<Batch<'_>> = a.iter().map(|u| dagger_batch(*u, p)).collect();
    let gs: Vec<Batch<'_>> = b.iter().map(|w| ddagger_batch(*w, p)).collect();
    let c = 4f64.powf(0.5 * p.nf() / p.s() - 0.5 * p.nf()) / p.s();
    let g = rho_gram(&fs, &gs, &|_| 1.0, p.n())?;
    Ok(g.into_iter().map(|row| row.into_iter().map(|v| c * v).collect()).collect())
}

/// Relative residual `||L_s e_k - k e_k|| / ||e_k||` in `L^2(r^{n-1} dr)` over `[lo, hi]`,
/// with `e_k` sampled on `grid` and `L_s` applied to the samples.
pub fn eigen_residual(p: &Params, k: usize, grid: &RadialGrid, lo: f64, hi: f64) -> Result<f64> {
    let e = EigenFunction::basis(*p, k).sample(grid)?;
    eigen_residual_of(&e, k as f64, p, lo, hi)
}

/// `||L_s u - lambda u|| / ||u||` over the grid points of `u` inside `[lo, hi]`.
pub fn eigen_residual_of(e: &RadialFunction, lambda: f64, p: &Params, lo: f64, hi: f64) -> Result<f64> {
    let grid = &e.grid;
    let le = apply_ls(e, p)?;
    let idx: Vec<usize> = (0..grid.len()).filter(|&i| (lo..=hi).contains(&grid.points()[i])).collect();
    if idx.len() < 5 {
        return Err(Error::InvalidParameter(format!("window [{lo}, {hi}] holds fewer than 5 grid points")));
    }
    let sub = RadialGrid::new(idx.iter().map(|&i| grid.points()[i]).collect())?;
    let res = RadialFunction::new(sub.clone(), idx.iter().map(|&i| le.values[i] - lambda * e.values[i]).collect(), p.n())?;
    let base = RadialFunction::new(sub, idx.iter().map(|&i| e.values[i]).collect(), p.n())?;
    Ok((res.l2_norm_sq() / base.l2_norm_sq()).sqrt())
}

/// Both routes of the duality pairing and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityReport {
    pub value: f64,
    pub route_a: f64,
    pub route_b: f64,
    pub diff: f64,
}

/// Default relative reconciliation tolerance.
pub const RECONCILE_TOL: f64 = 1e-8;

/// `(u, w)_*`: route (b) `2^{n/s-n} int u w r^{n-1} dr`, checked against route (a).
pub fn duality_pairing(u: &RadialFunction, w: &RadialFunction, p: &Params) -> Result<DualityReport> {
    duality_pairing_tol(u, w, p, RECONCILE_TOL)
}

/// As [`duality_pairing`] with an explicit relative tolerance.
pub fn duality_pairing_tol(u: &RadialFunction, w: &RadialFunction, p: &Params, tol: f64) -> Result<DualityReport> {
    let b = 2f64.powf(p.nf() / p.s() - p.nf()) * u.l2_inner(w)?;
    let a = duality_pairing_dual(u, w, p)?;
    let diff = (a - b).abs();
    if diff > tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::Reconciliation { a, b, diff });
    }
    Ok(DualityReport { value: b, route_a: a, route_b: b, diff })
}

/// Gram matrix with its expected diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerProductReport {
    pub gram: Vec<Vec<f64>>,
    pub diagonal_expected: Vec<f64>,
    /// Largest `|G_ij| / sqrt(G_ii G_jj)`, `i != j`.
    pub max_offdiag: f64,
    /// Largest relative deviation of the diagonal from `diagonal_expected`.
    pub max_diag_error: f64,
    /// Largest `|G_ij - G_ji|` relative to the diagonal scale.
    pub asymmetry: f64,
}

impl InnerProductReport {
    pub fn new(gram: Vec<Vec<f64>>, diagonal_expected: Vec<f64>) -> Self {
        let m = gram.len();
        let mut off = 0.0f64;
        let mut asym = 0.0f64;
        let mut diag = 0.0f64;
        for i in 0..m {
            if i < diagonal_expected.len() {
                diag = diag.max((gram[i][i] - diagonal_expected[i]).abs() / diagonal_expected[i].abs());
            }
            for j in 0..gram[i].len() {
                if i != j && j < m {
                    let scale = (gram[i][i] * gram[j][j]).abs().sqrt();
                    off = off.max(gram[i][j].abs() / scale);
                    asym = asym.max((gram[i][j] - gram[j][i]).abs() / scale);
                }
            }
        }
        Self { gram, diagonal_expected, max_offdiag: off, max_diag_error: diag, asymmetry: asym }
    }
}

/// `<e_k, e_k>_† = k! Gamma(k+n/2) 2^{2n/s-2n} / (2s)` for the canonical `e_k`.
pub fn dagger_norm_sq(p: &Params, k: usize) -> f64 {
    let (s, n) = (p.s(), p.nf());
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    fact * gamma_real(k as f64 + 0.5 * n).unwrap_or(f64::NAN) * 2f64.powf(2.0 * n / s - 2.0 * n) / (2.0 * s)
}

/// `<omega_k, omega_k>_‡ = 2^{n+1} s / (k! Gamma(k+n/2))`.
pub fn ddagger_norm_sq(p: &Params, k: usize) -> f64 {
    let (s, n) = (p.s(), p.nf());
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    2f64.powf(n + 1.0) * s / (fact * gamma_real(k as f64 + 0.5 * n).unwrap_or(f64::NAN))
}

/// `(e_k, omega_k)_* = 2^{n/s - n/2}` for the canonical `e_k`.
pub fn duality_constant(p: &Params) -> f64 {
    2f64.powf(p.nf() / p.s() - 0.5 * p.nf())
}

/// Gram matrix of `e_0..e_kmax` under `†`.
pub fn eigen_gram_dagger(p: &Params, kmax: usize) -> Result<InnerProductReport> {
    let fs: Vec<EigenFunction> = (0..=kmax).map(|k| EigenFunction::basis(*p, k)).collect();
    let refs: Vec<&dyn DaggerEval> = fs.iter().map(|f| f as &dyn DaggerEval).collect();
    let g = gram_dagger(&refs, &refs, p)?;
    Ok(InnerProductReport::new(g, (0..=kmax).map(|k| dagger_norm_sq(p, k)).collect()))
}

/// Gram matrix of `omega_0..omega_kmax` under `‡`.
pub fn adjoint_gram_ddagger(p: &Params, kmax: usize) -> Result<InnerProductReport> {
    let ws: Vec<AdjointEigenFunction> = (0..=kmax).map(|k| AdjointEigenFunction::new(*p, k)).collect();
    let refs: Vec<&dyn DdaggerEval> = ws.iter().map(|w| w as &dyn DdaggerEval).collect();
    let g = gram_ddagger(&refs, &refs, p)?;
    Ok(InnerProductReport::new(g, (0..=kmax).map(|k| ddagger_norm_sq(p, k)).collect()))
}

/// Matrix of `(e_j, omega_k)_*`.
pub fn duality_matrix(p: &Params, kmax: usize) -> Result<InnerProductReport> {
    let fs: Vec<EigenFunction> = (0..=kmax).map(|k| EigenFunction::basis(*p, k)).collect();
    let ws: Vec<AdjointEigenFunction> = (0..=kmax).map(|k| AdjointEigenFunction::new(*p, k)).collect();
    let a: Vec<&dyn DaggerEval> = fs.iter().map(|f| f as &dyn DaggerEval).collect();
    let b: Vec<&dyn DdaggerEval> = ws.iter().map(|w| w as &dyn DdaggerEval).collect();
    let g = gram_duality(&a, &b, p)?;
    Ok(InnerProductReport::new(g, vec![duality_constant(p); kmax + 1]))
}

/// `K_s(zeta1, zeta2) = (1/2) (zeta1 zeta2)^{-n/2} e^{-(zeta1^2+zeta2^2)} I_{(n-2)/2}(2 zeta1 zeta2)`,
/// with `e^{-2 zeta1 zeta2}` absorbed into the scaled Bessel function.
pub fn adjoint_kernel_k(p: &Params, zeta1: f64, zeta2: f64) -> Result<f64> {
    if !(zeta1 > 0.0) || !(zeta2 > 0.0) {
        return Err(Error::InvalidParameter(format!("kernel arguments must be positive: {zeta1}, {zeta2}")));
    }
    let n = p.nf();
    let x = 2.0 * zeta1 * zeta2;
    let d = zeta1 - zeta2;
    Ok(0.5 * (zeta1 * zeta2).powf(-0.5 * n) * (-d * d).exp() * bessel_i_scaled(0.5 * n - 1.0, x))
}

/// Leading large-`r` term `c rho^e` of `U_nu`, `rho = r^{2s}/4`, for non-integer `nu`:
/// the first pole `z = nu + n/2 + l` of `Gamma(nu + n/2 - z)` right of the contour, so
/// `l = floor(-nu - n/2) + 1` when `nu + n/2 <= 0` and `l = 0` otherwise, with
/// `c = -2s sin(pi nu)/pi Gamma(nu+1+l) Gamma(nu+n/2+l) / l!` and `e = -nu - n/(2s) - l`.
pub fn u_nu_leading_tail(p: &Params, nu: f64) -> Result<(f64, f64)> {
    let (s, n) = (p.s(), p.nf());
    if nu.fract() == 0.0 {
        return Err(Error::InvalidParameter(format!("U_nu at integer nu = {nu} decays exponentially")));
    }
    let l = if nu + 0.5 * n <= 0.0 { (-nu - 0.5 * n).floor() + 1.0 } else { 0.0 };
    let fact = gamma_real(l + 1.0)?;
    let c = -2.0 * s * crate::specfun::sin_pi(nu) / PI * gamma_real(nu + 1.0 + l)? * gamma_real(nu + 0.5 * n + l)? / fact;
    Ok((c, -nu - 0.5 * n / s - l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn par(s: f64, n: u32) -> Params {
        Params::new(s, n).unwrap()
    }

    #[test]
    fn fourier_side() {
        let p = par(0.4, 2);
        assert_eq!(eigen_fourier(&p, 1.0, 0.0), 0.0);
        assert_eq!(eigen_fourier(&p, 0.0, 0.0), 1.0);
        assert_relative_eq!(eigen_fourier(&p, 0.0, 1.7), (-(1.7f64.powf(0.8))).exp(), max_relative = 1e-15);
        let one = par(1.0, 3);
        assert_relative_eq!(eigen_fourier(&one, 2.0, 1.3), 1.3f64.powi(4) * (-1.69f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn series_at_origin() {
        let p = par(0.75, 2);
        let v = eigen_series(&p, 1.0, 0.0).unwrap();
        assert_relative_eq!(v.value, 2.0 * gamma_real(1.0 + 2.0 / 1.5).unwrap() / gamma_real(1.0).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(v.canonical(), eigen_at_origin(&p, 1.0).unwrap(), max_relative = 1e-14);
        let h = par(0.5, 3);
        let v = eigen_series(&h, 2.0, 0.0).unwrap();
        assert_relative_eq!(v.value, 2f64.powf(-0.5) * gamma_real(5.0).unwrap() / gamma_real(1.5).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(v.canonical(), eigen_at_origin(&h, 2.0).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn critical_raw_series_diverges() {
        let p = par(0.5, 2);
        assert!(eigen_series_raw(&p, 1.0, 0.5).is_ok());
        assert!(matches!(eigen_series_raw(&p, 1.0, 1.2), Err(Error::Divergence(_))));
        let a = eigen_series_raw(&p, 1.0, 0.5).unwrap().canonical();
        let b = eigen_series(&p, 1.0, 0.5).unwrap().canonical();
        assert!((a - b).abs() < 1e-12 * b.abs(), "{a} {b}");
    }

    #[test]
    fn small_s_series_needs_threshold() {
        let p = par(0.3, 2);
        let t = puiseux_threshold(&p, 1.0).unwrap();
        assert!(t > 1e-3 && t < 5.0, "{t}");
        assert!(matches!(eigen_series(&p, 1.0, t / 3.0), Err(Error::OutOfRegime { .. })));
        let v = eigen_series(&p, 1.0, 5.0).unwrap();
        let q = hankel_quadrature_at(&eigen_profile(&p, 1.0), 2, 5.0).unwrap();
        assert!((v.value - mellin_normalization(&p) * q).abs() < 1e-6 * v.value.abs(), "{} {}", v.value, q);
    }

    #[test]
    fn local_reduction() {
        for n in [2u32, 3] {
            let p = par(1.0, n);
            for k in 0..4 {
                let e = EigenFunction::basis(p, k);
                for r in [0.3, 1.0, 2.5, 6.0] {
                    let fourier = e.eval_route(Route::Fourier, r).unwrap();
                    let series = e.eval_route(Route::Series, r).unwrap();
                    let auto = e.eval(r).unwrap();
                    assert!((fourier - auto).abs() < 1e-10 * (1.0 + auto.abs()), "n={n} k={k} r={r}");
                    assert!((series - auto).abs() < 1e-10 * (1.0 + auto.abs()));
                }
            }
        }
    }

    #[test]
    fn laguerre_families() {
        let p = par(0.6, 3);
        for k in 0..3 {
            for r in [0.5, 2.0, 7.0] {
                assert_relative_eq!(u_nu(&p, k as f64, r).unwrap(), script_l(&p, k, r), max_relative = 1e-11);
            }
        }
        let s = par(0.4, 2);
        assert_relative_eq!(frak_l(&s, 0, 3.3), 0.8, max_relative = 1e-15);
        let rho: f64 = 0.25 * 2f64.powf(0.8);
        assert_relative_eq!(script_l(&s, 0, 2.0), 0.8 * rho.powf(1.0 - 2.5) * (-rho).exp(), max_relative = 1e-14);
    }

    #[test]
    fn kernel_symmetry_and_half_order() {
        let p = par(0.5, 3);
        assert_relative_eq!(adjoint_kernel_k(&p, 1.0, 1.7).unwrap(), adjoint_kernel_k(&p, 1.7, 1.0).unwrap(), max_relative = 1e-15);
        let q = par(0.5, 1);
        for &(a, b) in &[(0.3f64, 0.8f64), (1.2, 2.5), (6.0, 7.5)] {
            let closed = ((-(a - b) * (a - b)).exp() + (-(a + b) * (a + b)).exp()) / (4.0 * PI.sqrt() * a * b);
            assert_relative_eq!(adjoint_kernel_k(&q, a, b).unwrap(), closed, max_relative = 1e-13);
        }
    }
}
