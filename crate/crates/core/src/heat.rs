//! The fractional heat equation `phi_t + (-Delta)^s phi = 0` on radial data: heat kernel,
//! spectral solution in self-similar variables, Fourier-multiplier oracle and presets.
//!
//! Self-similar variables: `x~ = x / (1+t)^{1/(2s)}`, `t~ = log(1+t)` and
//! `phi(t, x) = (1+t)^{-n/(2s)} psi(t~, x~)`, under which `psi_t~ + L_s psi = 0`.

use crate::eigenbasis::{dagger_constant, dagger_norm_sq, eigen_profile, EigenFunction};
use crate::error::{Error, Result, Warning};
use crate::params::Params;
use crate::quad::gauss_legendre;
use crate::radial::{PowerSeries, RadialFunction, RadialGrid, SpectralProfile};
use crate::radial_transforms::{hankel_inverse_profile, spectral_profile, DaggerEval};
use crate::specfun::laguerre;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::str::FromStr;

/// Default number of retained modes beyond `e_0`.
pub const DEFAULT_MODES: usize = 8;
/// Largest accepted mode index.
pub const MAX_MODES: usize = 16;
/// Relative weight of the last mode above which a truncation warning is attached.
pub const TRUNCATION_TOL: f64 = 1e-6;

/// `(2 pi)^{-n/2} e^{-t zeta^{2s}}`, the transform of `G_s(t, .)`.
pub fn greens_profile(p: &Params, t: f64) -> SpectralProfile {
    eigen_profile(p, 0.0).dilate(t.powf(0.5 / p.s())).scale((2.0 * PI).powf(-0.5 * p.nf()))
}

/// Heat kernel `G_s(t, r) = (2 pi)^{-n/2} t^{-n/(2s)} e_0(r t^{-1/(2s)})`, the inverse transform
/// of `(2 pi)^{-n/2} e^{-t zeta^{2s}}`.
pub fn greens_function(p: &Params, t: f64, r_grid: &RadialGrid) -> Result<RadialFunction> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("heat kernel needs t > 0, got {t}")));
    }
    let (s, n) = (p.s(), p.nf());
    let e0 = EigenFunction::basis(*p, 0);
    let scale = t.powf(-0.5 / s);
    let amp = (2.0 * PI).powf(-0.5 * n) * t.powf(-0.5 * n / s);
    let values = r_grid.points().par_iter().map(|&r| Ok(amp * e0.eval(r * scale)?)).collect::<Result<Vec<_>>>()?;
    let profile = greens_profile(p, t);
    let mut out = RadialFunction::new(r_grid.clone(), values, p.n())?;
    out.head = Some(e0.head_series(3)?.rescaled(scale, amp));
    out.tail = e0.tail_series_at(r_grid.max() * scale).map(|t| t.rescaled(scale, amp));
    Ok(out.with_transform(profile))
}

/// Direction of a [`SelfSimilarMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToSelfSimilar,
    ToPhysical,
}

/// The change of variables `(t, x, phi) <-> (t~, x~, psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarMap {
    pub params: Params,
    pub direction: Direction,
}

impl SelfSimilarMap {
    pub fn new(params: Params, direction: Direction) -> Self {
        Self { params, direction }
    }

    pub fn inverse(&self) -> Self {
        let direction = match self.direction {
            Direction::ToSelfSimilar => Direction::ToPhysical,
            Direction::ToPhysical => Direction::ToSelfSimilar,
        };
        Self { params: self.params, direction }
    }

    /// `t~ = log(1+t)` or `t = e^{t~} - 1`.
    pub fn time(&self, t: f64) -> f64 {
        match self.direction {
            Direction::ToSelfSimilar => t.ln_1p(),
            Direction::ToPhysical => t.exp_m1(),
        }
    }

    /// Physical time belonging to the argument `t` (physical or self-similar).
    fn physical_time(&self, t: f64) -> f64 {
        match self.direction {
            Direction::ToSelfSimilar => t,
            Direction::ToPhysical => t.exp_m1(),
        }
    }

    /// `(1+t)^{1/(2s)}`, the physical length of a unit self-similar length.
    pub fn length_scale(&self, t: f64) -> f64 {
        (1.0 + self.physical_time(t)).powf(0.5 / self.params.s())
    }

    /// `(1+t)^{-n/(2s)}`, the factor `phi / psi`.
    pub fn amplitude(&self, t: f64) -> f64 {
        (1.0 + self.physical_time(t)).powf(-0.5 * self.params.nf() / self.params.s())
    }

    /// Maps a radius at time `t` (given in the source variables).
    pub fn radius(&self, t: f64, r: f64) -> f64 {
        match self.direction {
            Direction::ToSelfSimilar => r / self.length_scale(t),
            Direction::ToPhysical => r * self.length_scale(t),
        }
    }

    /// Maps a profile at time `t` (given in the source variables); the grid is carried along.
    pub fn apply(&self, t: f64, u: &RadialFunction) -> Result<RadialFunction> {
        let (amp, len) = (self.amplitude(t), self.length_scale(t));
        let (gain, stretch) = match self.direction {
            Direction::ToSelfSimilar => (1.0 / amp, 1.0 / len),
            Direction::ToPhysical => (amp, len),
        };
        let grid = RadialGrid::new(u.grid.points().iter().map(|r| r * stretch).collect())?;
        let mut out = RadialFunction::new(grid, u.values.iter().map(|v| v * gain).collect(), u.n)?;
        out.head = u.head.as_ref().map(|h| h.rescaled(1.0 / stretch, gain));
        out.tail = u.tail.as_ref().map(|h| h.rescaled(1.0 / stretch, gain));
        out.transform = u.transform.as_ref().map(|f| f.dilate(stretch).scale(gain * stretch.powf(u.n as f64)));
        out.warnings = u.warnings.clone();
        Ok(out)
    }
}

/// Panel width and order of the projection quadrature in `rho`.
const PROJ_PANEL: f64 = 0.5;
const PROJ_ORDER: usize = 16;
const PROJ_MAX: f64 = 60.0;
/// `|phi0†|` below this fraction of its maximum is treated as quadrature noise.
const PROJ_NOISE: f64 = 1e-14;
/// Largest tolerated share of the `†` norm density at the end of the integration range.
const PROJ_DECAY: f64 = 1e-8;

/// Relative excess of `sum a_k^2 <e_k, e_k>_†` over the `†` norm tolerated as quadrature error.
const BESSEL_TOL: f64 = 1e-6;

/// `a_k = <phi0, e_k>_† / <e_k, e_k>_†` for `k = 0..=k_max`.
pub fn project(phi0: &RadialFunction, p: &Params, k_max: usize) -> Result<Vec<f64>> {
    project_dagger(phi0, p, k_max)
}

/// [`project`] for any function with a `†` image.
///
/// The products are taken as `int phi0†(rho) P_k(rho) rho^{n-1} d rho` with the polynomial
/// `P_k = e^{rho^2/4} e_k†`, so no growing weight is evaluated. Integration stops once `phi0†`
/// reaches the quadrature noise; the `†` norm density must have decayed by then.
pub fn project_dagger(phi0: &dyn DaggerEval, p: &Params, k_max: usize) -> Result<Vec<f64>> {
    if k_max > MAX_MODES {
        return Err(Error::InvalidParameter(format!("mode cap {k_max} exceeds {MAX_MODES}")));
    }
    let n = p.nf();
    let (gx, gw) = gauss_legendre(PROJ_ORDER);
    let mut acc = vec![0.0; k_max + 1];
    let mut norm_density = 0.0f64;
    let mut peak = 0.0f64;
    let mut quiet = 0;
    let mut a = 0.0;
    let mut last_density = f64::INFINITY;
    while a < PROJ_MAX {
        let nodes: Vec<f64> = gx.iter().map(|x| a + 0.5 * PROJ_PANEL * (x + 1.0)).collect();
        let v = phi0.dagger_at(p, &nodes)?;
        let mut panel_peak = 0.0f64;
        let mut dens = 0.0;
        for (q, (&r, &fv)) in nodes.iter().zip(&v).enumerate() {
            let w = 0.5 * PROJ_PANEL * gw[q] * r.powf(n - 1.0);
            let x = 0.25 * r * r;
            for (k, slot) in acc.iter_mut().enumerate() {
                *slot += w * fv * local_weight_polynomial(k, n, x);
            }
            dens += w * fv * fv * x.exp();
            panel_peak = panel_peak.max(fv.abs());
        }
        peak = peak.max(panel_peak);
        norm_density += dens;
        last_density = dens;
        a += PROJ_PANEL;
        if a >= 2.0 && panel_peak <= PROJ_NOISE * peak {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if !(norm_density.is_finite() && last_density <= PROJ_DECAY * norm_density) {
        return Err(Error::WeightOverflow { at: a, ratio: last_density / norm_density });
    }
    let c = dagger_constant(p);
    let coeffs: Vec<f64> = acc.iter().enumerate().map(|(k, v)| c * v / dagger_norm_sq(p, k)).collect();
    // Bessel inequality against the quadrature norm
    let norm = c * norm_density;
    let captured: f64 = coeffs.iter().enumerate().map(|(k, a)| a * a * dagger_norm_sq(p, k)).sum();
    if !(captured <= norm * (1.0 + BESSEL_TOL)) {
        return Err(Error::WeightOverflow { at: a, ratio: captured / norm });
    }
    Ok(coeffs)
}

/// `e^{x} e_k^{(1)} = 2^{-n/2} k! L_k^{((n-2)/2)}(x)` at `x = rho^2/4`.
fn local_weight_polynomial(k: usize, n: f64, x: f64) -> f64 {
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    2f64.powf(-0.5 * n) * fact * laguerre(k, 0.5 * n - 1.0, x)
}

/// Spectral solution `psi(t~) = sum_k a_k e^{-k t~} e_k` on a fixed grid.
#[derive(Debug, Clone)]
pub struct HeatSolution {
    pub params: Params,
    pub coefficients: Vec<f64>,
    /// Self-similar times of the stored snapshots.
    pub times: Vec<f64>,
    pub snapshots: Vec<RadialFunction>,
    /// `|a_K| / max_k |a_k|`.
    pub coefficient_decay: f64,
    grid: RadialGrid,
    basis: Vec<RadialFunction>,
}

impl HeatSolution {
    /// Needs at least two modes (`K >= 1`).
    pub fn new(params: Params, coefficients: Vec<f64>, grid: &RadialGrid) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::InvalidParameter("a spectral solution needs modes 0..K with K >= 1".into()));
        }
        if coefficients.len() > MAX_MODES + 1 {
            return Err(Error::InvalidParameter(format!("at most {} modes", MAX_MODES + 1)));
        }
        let basis =
            (0..coefficients.len()).into_par_iter().map(|k| EigenFunction::basis(params, k).sample(grid)).collect::<Result<Vec<_>>>()?;
        let top = coefficients.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let coefficient_decay = if top > 0.0 { coefficients.last().unwrap().abs() / top } else { 0.0 };
        Ok(Self { params, coefficients, times: Vec::new(), snapshots: Vec::new(), coefficient_decay, grid: grid.clone(), basis })
    }

    /// Projects `phi0` onto `e_0..e_{k_max}` and prepares the solution on `grid`.
    pub fn from_initial(phi0: &RadialFunction, params: Params, k_max: usize, grid: &RadialGrid) -> Result<Self> {
        let a = project(phi0, &params, k_max)?;
        Self::new(params, a, grid)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Largest retained mode `K`.
    pub fn modes(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Stores snapshots at the given self-similar times.
    pub fn with_snapshots(mut self, times: &[f64]) -> Result<Self> {
        let snaps = times.par_iter().map(|&t| evolve_spectral(&self, t)).collect::<Result<Vec<_>>>()?;
        self.times = times.to_vec();
        self.snapshots = snaps;
        Ok(self)
    }
}

/// `sum_k a_k e^{-k t~} e_k` on the solution grid (self-similar variables).
pub fn evolve_spectral(sol: &HeatSolution, t_tilde: f64) -> Result<RadialFunction> {
    if !(t_tilde >= 0.0) || !t_tilde.is_finite() {
        return Err(Error::InvalidParameter(format!("self-similar time {t_tilde}")));
    }
    let mut values = vec![0.0; sol.grid.len()];
    let mut profile: Option<SpectralProfile> = None;
    for (k, (a, e)) in sol.coefficients.iter().zip(&sol.basis).enumerate() {
        let c = a * (-(k as f64) * t_tilde).exp();
        for (v, b) in values.iter_mut().zip(&e.values) {
            *v += c * b;
        }
        if let Some(tr) = &e.transform {
            let term = tr.scale(c);
            profile = Some(match profile {
                Some(acc) => acc.add(&term),
                None => term,
            });
        }
    }
    let mut out = RadialFunction::new(sol.grid.clone(), values, sol.params.n())?;
    out.head = Some(combine_heads(sol, t_tilde));
    out.transform = profile;
    let norm = out.l2_norm_sq().sqrt();
    let k = sol.modes();
    let last = (sol.coefficients[k] * (-(k as f64) * t_tilde).exp()).abs() * sol.basis[k].l2_norm_sq().sqrt();
    if norm > 0.0 && last > TRUNCATION_TOL * norm {
        out.warnings.push(Warning::ModeTruncation { estimate: last / norm });
    }
    Ok(out)
}

fn combine_heads(sol: &HeatSolution, t_tilde: f64) -> PowerSeries {
    let mut acc = PowerSeries::default();
    for (k, (a, e)) in sol.coefficients.iter().zip(&sol.basis).enumerate() {
        if let Some(h) = &e.head {
            acc = acc.add(&h.scale(a * (-(k as f64) * t_tilde).exp()), 8);
        }
    }
    acc
}

/// Physical solution `phi(t, r) = (1+t)^{-n/(2s)} sum_k a_k (1+t)^{-k} e_k(r (1+t)^{-1/(2s)})`.
pub fn evolve_physical(sol: &HeatSolution, t: f64, r_grid: &RadialGrid) -> Result<RadialFunction> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    let map = SelfSimilarMap::new(sol.params, Direction::ToSelfSimilar);
    let tt = map.time(t);
    let amp = map.amplitude(t);
    let fs: Vec<EigenFunction> = (0..sol.coefficients.len()).map(|k| EigenFunction::basis(sol.params, k)).collect();
    let weights: Vec<f64> = sol.coefficients.iter().enumerate().map(|(k, a)| a * (-(k as f64) * tt).exp()).collect();
    let values = r_grid
        .points()
        .par_iter()
        .map(|&r| {
            let x = map.radius(t, r);
            let mut v = 0.0;
            for (w, e) in weights.iter().zip(&fs) {
                v += w * e.eval(x)?;
            }
            Ok(amp * v)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = RadialFunction::new(r_grid.clone(), values, sol.params.n())?;
    let head = combine_heads(sol, tt);
    out.head = Some(head.rescaled(1.0 / map.length_scale(t), amp));
    Ok(out)
}

/// `(1+t)^{-n/(2s)} a_0 e_0(r (1+t)^{-1/(2s)})`, the leading long-time behaviour.
pub fn leading_asymptotics(sol: &HeatSolution, t: f64, r_grid: &RadialGrid) -> Result<RadialFunction> {
    let mut lead = sol.clone();
    for a in lead.coefficients.iter_mut().skip(1) {
        *a = 0.0;
    }
    evolve_physical(&lead, t, r_grid)
}

/// Inverse transform of `e^{-t zeta^{2s}} phi0^(zeta)` on the grid of `phi0`.
pub fn evolve_fourier_oracle(phi0: &RadialFunction, p: &Params, t: f64) -> Result<RadialFunction> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    if phi0.n != p.n() {
        return Err(Error::InvalidParameter(format!("function tagged n = {} used with n = {}", phi0.n, p.n())));
    }
    if t == 0.0 {
        return Ok(phi0.clone());
    }
    let profile = spectral_profile(phi0)?.times_heat(p.s(), t);
    let mut out = hankel_inverse_profile(&profile, phi0.n, &phi0.grid)?;
    out.warnings.extend(phi0.warnings.iter().cloned());
    Ok(out)
}

/// `||a - b|| / ||b||` in `L^2(r^{n-1} dr)` on a shared grid.
pub fn l2_relative_error(a: &RadialFunction, b: &RadialFunction) -> Result<f64> {
    let d = a.combine(1.0, b, -1.0)?;
    Ok((d.l2_norm_sq() / b.l2_norm_sq()).sqrt())
}

/// Named initial data.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    /// `sum c_k e_k`.
    Modes(Vec<(usize, f64)>),
    /// Transform `e^{-zeta^{2s}/2}`, with `a_k = 1 / (2^k k!)`.
    Gaussian,
}

impl FromStr for Preset {
    type Err = Error;

    /// `gaussian`, or a sum of terms `c*ek` / `ek` such as `e0+0.5*e3`.
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("gaussian") {
            return Ok(Preset::Gaussian);
        }
        let bad = || Error::InvalidParameter(format!("unknown preset '{text}'"));
        let mut modes = Vec::new();
        let normalized = t.replace(' ', "").replace("-e", "+-1*e");
        for term in normalized.split('+').filter(|s| !s.is_empty()) {
            let (c, e) = match term.split_once('*') {
                Some((c, e)) => (c.parse::<f64>().map_err(|_| bad())?, e),
                None => (1.0, term),
            };
            let k = e.strip_prefix('e').ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())?;
            modes.push((k, c));
        }
        if modes.is_empty() {
            return Err(bad());
        }
        Ok(Preset::Modes(modes))
    }
}

impl Preset {
    /// Transform of the initial datum.
    pub fn profile(&self, p: &Params) -> SpectralProfile {
        match self {
            Preset::Modes(m) => {
                let mut it = m.iter().map(|&(k, c)| eigen_profile(p, k as f64).scale(c));
                let first = it.next().expect("non-empty preset");
                it.fold(first, |acc, f| acc.add(&f))
            }
            Preset::Gaussian => eigen_profile(p, 0.0).dilate(0.5f64.powf(0.5 / p.s())),
        }
    }

    /// Exact expansion coefficients `a_0..a_{k_max}`.
    pub fn coefficients(&self, k_max: usize) -> Vec<f64> {
        let mut a = vec![0.0; k_max + 1];
        match self {
            Preset::Modes(m) => {
                for &(k, c) in m {
                    if k <= k_max {
                        a[k] += c;
                    }
                }
            }
            Preset::Gaussian => {
                let mut c = 1.0;
                for (k, slot) in a.iter_mut().enumerate() {
                    if k > 0 {
                        c /= 2.0 * k as f64;
                    }
                    *slot = c;
                }
            }
        }
        a
    }

    /// Samples on a grid with the transform attached.
    pub fn sample(&self, p: &Params, grid: &RadialGrid) -> Result<RadialFunction> {
        match self {
            Preset::Modes(m) => {
                let parts = m.iter().map(|&(k, c)| Ok(EigenFunction::basis(*p, k).sample(grid)?.scaled(c))).collect::<Result<Vec<_>>>()?;
                let mut acc = parts[0].clone();
                for f in &parts[1..] {
                    acc = acc.combine(1.0, f, 1.0)?;
                }
                Ok(acc)
            }
            Preset::Gaussian => {
                // e^{-x/2} = e^{-x} e^{x/2}: the profile equals e_0 dilated by 2^{-1/(2s)}
                let k = 0.5f64.powf(0.5 / p.s());
                let e0 = EigenFunction::basis(*p, 0);
                let amp = k.powf(-p.nf());
                let values = grid.points().par_iter().map(|&r| Ok(amp * e0.eval(r / k)?)).collect::<Result<Vec<_>>>()?;
                let mut out = RadialFunction::new(grid.clone(), values, p.n())?;
                out.head = Some(e0.head_series(3)?.rescaled(1.0 / k, amp));
                out.tail = e0.tail_series_at(grid.max() / k).map(|t| t.rescaled(1.0 / k, amp));
                Ok(out.with_transform(self.profile(p)))
            }
        }
    }
}
