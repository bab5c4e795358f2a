//! Sampled radial functions, their Fourier-side profiles and the power-law
//! expansions used beyond the sampled range.

use crate::error::{Error, Result, Warning};
use std::fmt;
use std::sync::Arc;

/// Point distribution of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
    Custom,
}

/// Strictly increasing positive sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl RadialGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidParameter("a grid needs at least 4 points".into()));
        }
        if !(points[0] > 0.0) {
            return Err(Error::InvalidParameter("grid points must be positive".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("grid points must be strictly increasing".into()));
        }
        Ok(Self { points, spacing: Spacing::Custom })
    }

    /// `count` log-spaced points on `[min, max]`.
    pub fn log(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && max > min && count >= 4) {
            return Err(Error::InvalidParameter(format!("log grid [{min}, {max}] x {count}")));
        }
        let (a, b) = (min.ln(), max.ln());
        let h = (b - a) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| (a + h * i as f64).exp()).collect();
        points[0] = min;
        points[count - 1] = max;
        Ok(Self { points, spacing: Spacing::Log })
    }

    /// `count` equally spaced points on `[min, max]`.
    pub fn linear(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0 && max > min && count >= 4) {
            return Err(Error::InvalidParameter(format!("linear grid [{min}, {max}] x {count}")));
        }
        let h = (max - min) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| min + h * i as f64).collect();
        points[count - 1] = max;
        Ok(Self { points, spacing: Spacing::Linear })
    }

    /// The default grid: 2048 log-spaced points on `[1e-3, 1e2]`.
    pub fn default_log() -> Self {
        Self::log(1e-3, 1e2, 2048).expect("static grid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Cubic Lagrange interpolation in `log r`; points outside the grid are an error.
    pub fn interpolate(&self, values: &[f64], r: f64) -> Result<f64> {
        let p = &self.points;
        let n = p.len();
        if !(r >= p[0] && r <= p[n - 1]) {
            return Err(Error::Extrapolation { r, lo: p[0], hi: p[n - 1] });
        }
        let i = match self.spacing {
            Spacing::Log => {
                let h = (p[n - 1].ln() - p[0].ln()) / (n - 1) as f64;
                (((r.ln() - p[0].ln()) / h).floor() as usize).min(n - 2)
            }
            _ => p.partition_point(|&x| x <= r).saturating_sub(1).min(n - 2),
        };
        let i = if i + 1 < n && r < p[i] { i.saturating_sub(1) } else { i };
        let i = if r > p[i + 1] { (i + 1).min(n - 2) } else { i };
        let lo = i.saturating_sub(1).min(n - 4);
        let t = r.ln();
        let mut acc = 0.0;
        for a in lo..lo + 4 {
            let ta = p[a].ln();
            let mut w = 1.0;
            for b in lo..lo + 4 {
                if a != b {
                    let tb = p[b].ln();
                    w *= (t - tb) / (ta - tb);
                }
            }
            acc += w * values[a];
        }
        Ok(acc)
    }
}

/// Relative level below which trailing transform samples are dropped.
const PROFILE_FLOOR: f64 = 1e-16;

/// A finite power-law expansion `sum_j c_j x^{p_j}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerSeries {
    pub terms: Vec<(f64, f64)>,
}

impl PowerSeries {
    pub fn new(mut terms: Vec<(f64, f64)>) -> Self {
        terms.retain(|t| t.1 != 0.0 && t.1.is_finite());
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(p, c)| c * x.powf(p)).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.terms.iter().map(|&(p, c)| (p, c * k)).collect())
    }

    /// Multiplication by `x^a`.
    pub fn shift(&self, a: f64) -> Self {
        Self::new(self.terms.iter().map(|&(p, c)| (p + a, c)).collect())
    }

    /// Substitution `x -> x^q`.
    pub fn compose_power(&self, q: f64) -> Self {
        Self::new(self.terms.iter().map(|&(p, c)| (p * q, c)).collect())
    }

    /// `x -> amp f(k x)`.
    pub fn rescaled(&self, k: f64, amp: f64) -> Self {
        Self::new(self.terms.iter().map(|&(p, c)| (p, amp * c * k.powf(p))).collect())
    }

    /// Product keeping the `keep` lowest exponents.
    pub fn mul(&self, other: &Self, keep: usize) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &(p, c) in &self.terms {
            for &(q, d) in &other.terms {
                out.push((p + q, c * d));
            }
        }
        Self::merged(out, keep)
    }

    pub fn add(&self, other: &Self, keep: usize) -> Self {
        let mut out = self.terms.clone();
        out.extend_from_slice(&other.terms);
        Self::merged(out, keep)
    }

    fn merged(mut out: Vec<(f64, f64)>, keep: usize) -> Self {
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (p, c) in out {
            match merged.last_mut() {
                Some(last) if (last.0 - p).abs() < 1e-12 * (1.0 + p.abs()) => last.1 += c,
                _ => merged.push((p, c)),
            }
        }
        merged.truncate(keep);
        Self::new(merged)
    }
}

/// A Fourier-side radial profile `zeta -> f(zeta)` known in closed form.
///
/// `cut` bounds the region where `f` is not negligible and `small` holds its
/// expansion as `zeta -> 0`, which fixes the power tail of the inverse transform.
#[derive(Clone)]
pub struct SpectralProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub cut: f64,
    pub small: PowerSeries,
    /// Interpolation knots when built from samples rather than a closed form.
    pub knots: Option<Arc<Vec<f64>>>,
}

impl fmt::Debug for SpectralProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralProfile").field("cut", &self.cut).field("small", &self.small).finish()
    }
}

const SERIES_KEEP: usize = 64;

impl SpectralProfile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, cut: f64, small: PowerSeries) -> Self {
        Self { f: Arc::new(f), cut, small, knots: None }
    }

    fn derived(&self, f: impl Fn(f64) -> f64 + Send + Sync + 'static, cut: f64, small: PowerSeries) -> Self {
        Self { f: Arc::new(f), cut, small, knots: self.knots.clone() }
    }

    pub fn eval(&self, zeta: f64) -> f64 {
        (self.f)(zeta)
    }

    pub fn func(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        Arc::clone(&self.f)
    }

    pub fn scale(&self, k: f64) -> Self {
        let f = self.func();
        self.derived(move |z| k * f(z), self.cut, self.small.scale(k))
    }

    /// `zeta^a f(zeta)`.
    pub fn times_power(&self, a: f64) -> Self {
        let f = self.func();
        self.derived(move |z| if z == 0.0 { 0.0 } else { z.powf(a) * f(z) }, self.cut, self.small.shift(a))
    }

    /// `e^{-t zeta^{2s}} f(zeta)`.
    pub fn times_heat(&self, s: f64, t: f64) -> Self {
        let f = self.func();
        let mut decay = Vec::new();
        let mut c = 1.0;
        for m in 0..SERIES_KEEP {
            decay.push((2.0 * s * m as f64, c));
            c *= -t / (m as f64 + 1.0);
        }
        let small = self.small.mul(&PowerSeries::new(decay), SERIES_KEEP);
        self.derived(move |z| (-t * z.powf(2.0 * s)).exp() * f(z), self.cut, small)
    }

    /// `zeta -> f(k zeta)`, `k > 0`.
    pub fn dilate(&self, k: f64) -> Self {
        let f = self.func();
        let small = PowerSeries::new(self.small.terms.iter().map(|&(p, c)| (p, c * k.powf(p))).collect());
        let mut out = self.derived(move |z| f(k * z), self.cut / k, small);
        out.knots = self.knots.as_ref().map(|v| Arc::new(v.iter().map(|x| x / k).collect()));
        out
    }

    /// `theta -> f(theta^q)`.
    pub fn substitute_power(&self, q: f64) -> Self {
        let f = self.func();
        let mut out = self.derived(move |z| f(z.powf(q)), self.cut.powf(1.0 / q), self.small.compose_power(q));
        out.knots = self.knots.as_ref().map(|k| Arc::new(k.iter().map(|x| x.powf(1.0 / q)).collect()));
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = self.func();
        let g = other.func();
        let mut out = Self::new(move |z| f(z) + g(z), self.cut.max(other.cut), self.small.add(&other.small, SERIES_KEEP));
        out.knots = match (&self.knots, &other.knots) {
            (Some(a), Some(b)) => {
                let mut k: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
                k.sort_by(f64::total_cmp);
                k.dedup();
                Some(Arc::new(k))
            }
            (Some(a), None) | (None, Some(a)) => Some(Arc::clone(a)),
            (None, None) => None,
        };
        out
    }
}

/// Samples of a radial function `u(r)` in dimension `n`.
#[derive(Clone)]
pub struct RadialFunction {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub n: u32,
    /// Expansion used below the first grid point.
    pub head: Option<PowerSeries>,
    /// Expansion used beyond the last grid point.
    pub tail: Option<PowerSeries>,
    /// Closed-form Hankel transform, when known.
    pub transform: Option<SpectralProfile>,
    pub warnings: Vec<Warning>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("n", &self.n)
            .field("points", &self.grid.len())
            .field("range", &(self.grid.min(), self.grid.max()))
            .field("has_transform", &self.transform.is_some())
            .field("warnings", &self.warnings)
            .finish()
    }
}

impl RadialFunction {
    pub fn new(grid: RadialGrid, values: Vec<f64>, n: u32) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!("{} values for {} grid points", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(Self { grid, values, n, head: None, tail: None, transform: None, warnings: Vec::new() })
    }

    /// Samples `f` on `grid`.
    pub fn from_fn(grid: &RadialGrid, n: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&r| f(r)).collect();
        Self::new(grid.clone(), values, n)
    }

    pub fn with_transform(mut self, p: SpectralProfile) -> Self {
        self.transform = Some(p);
        self
    }

    pub fn with_head(mut self, h: PowerSeries) -> Self {
        self.head = Some(h);
        self
    }

    pub fn with_tail(mut self, t: PowerSeries) -> Self {
        self.tail = Some(t);
        self
    }

    /// Interpolated value inside the sampled range.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.grid.interpolate(&self.values, r)
    }

    /// As [`RadialFunction::eval_extended`], with zero beyond the grid when no tail is attached.
    pub fn eval_or_zero(&self, r: f64) -> Result<f64> {
        if r > self.grid.max() && self.tail.is_none() {
            return Ok(0.0);
        }
        if r < self.grid.min() && self.head.is_none() {
            return Ok(self.values[0]);
        }
        self.eval_extended(r)
    }

    /// Value using the head and tail expansions outside the sampled range.
    pub fn eval_extended(&self, r: f64) -> Result<f64> {
        if r < self.grid.min() {
            if let Some(h) = &self.head {
                return Ok(h.eval(r));
            }
        } else if r > self.grid.max() {
            if let Some(t) = &self.tail {
                return Ok(t.eval(r));
            }
        }
        self.eval(r)
    }

    /// Pointwise linear combination on a shared grid; closed-form transforms combine too.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.grid != other.grid || self.n != other.n {
            return Err(Error::InvalidParameter("combine needs a shared grid and dimension".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        let mut out = Self::new(self.grid.clone(), values, self.n)?;
        out.head = match (&self.head, &other.head) {
            (Some(h), Some(g)) => Some(h.scale(a).add(&g.scale(b), 32)),
            _ => None,
        };
        out.tail = match (&self.tail, &other.tail) {
            (Some(h), Some(g)) => Some(h.scale(a).add(&g.scale(b), 32)),
            _ => None,
        };
        out.transform = match (&self.transform, &other.transform) {
            (Some(p), Some(q)) => Some(p.scale(a).add(&q.scale(b))),
            _ => None,
        };
        Ok(out)
    }

    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= k);
        out.head = out.head.map(|h| h.scale(k));
        out.tail = out.tail.map(|t| t.scale(k));
        out.transform = out.transform.map(|p| p.scale(k));
        out
    }

    /// `int_0^{r_max} u v r^{n-1} dr` for two functions on the same grid: Simpson in `log r`
    /// over the samples plus the head expansions (or a constant extrapolation) below `r_min`.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidParameter("L2 inner product needs a shared grid".into()));
        }
        let d = self.n as f64;
        let w: Vec<f64> = self.values.iter().zip(&other.values).zip(self.grid.points()).map(|((a, b), r)| a * b * r.powf(d)).collect();
        Ok(simpson_log(self.grid.points(), &w) + self.head_integral(other))
    }

    /// `int_0^{r_max} |u|^2 r^{n-1} dr`, as [`RadialFunction::l2_inner`].
    pub fn l2_norm_sq(&self) -> f64 {
        let d = self.n as f64;
        let w: Vec<f64> = self.values.iter().zip(self.grid.points()).map(|(v, r)| v * v * r.powf(d)).collect();
        simpson_log(self.grid.points(), &w) + self.head_integral(self)
    }

    /// `int_0^infinity u r^{n-1} dr`, with the head and tail expansions outside the grid.
    pub fn mass(&self) -> f64 {
        let d = self.n as f64;
        let w: Vec<f64> = self.values.iter().zip(self.grid.points()).map(|(v, r)| v * r.powf(d)).collect();
        let (a, b) = (self.grid.min(), self.grid.max());
        let head = match &self.head {
            Some(h) => h.terms.iter().filter(|(p, _)| p + d > 0.0).map(|(p, c)| c * a.powf(p + d) / (p + d)).sum(),
            None => self.values[0] * a.powf(d) / d,
        };
        let tail = match &self.tail {
            Some(t) => {
                let mut acc = 0.0;
                let mut last = f64::INFINITY;
                for &(p, c) in t.terms.iter().rev().filter(|(p, _)| p + d < 0.0) {
                    let v = -c * b.powf(p + d) / (p + d);
                    if v.abs() > last {
                        break;
                    }
                    last = v.abs();
                    acc += v;
                }
                acc
            }
            None => 0.0,
        };
        simpson_log(self.grid.points(), &w) + head + tail
    }

    fn head_integral(&self, other: &Self) -> f64 {
        let a = self.grid.min();
        let d = self.n as f64;
        match (&self.head, &other.head) {
            (Some(h1), Some(h2)) => h1.mul(h2, 8).terms.iter().filter(|(p, _)| p + d > 0.0).map(|(p, c)| c * a.powf(p + d) / (p + d)).sum(),
            _ => self.values[0] * other.values[0] * a.powf(d) / d,
        }
    }
}

/// Samples of a Fourier-side radial function `u^(zeta)`.
#[derive(Clone)]
pub struct SpectralRadialFunction {
    pub zeta_grid: RadialGrid,
    pub values: Vec<f64>,
    pub n: u32,
    pub profile: Option<SpectralProfile>,
    pub warnings: Vec<Warning>,
}

impl fmt::Debug for SpectralRadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralRadialFunction")
            .field("n", &self.n)
            .field("points", &self.zeta_grid.len())
            .field("has_profile", &self.profile.is_some())
            .finish()
    }
}

impl SpectralRadialFunction {
    pub fn from_profile(zeta_grid: &RadialGrid, n: u32, p: SpectralProfile) -> Self {
        let values = zeta_grid.points().iter().map(|&z| p.eval(z)).collect();
        Self { zeta_grid: zeta_grid.clone(), values, n, profile: Some(p), warnings: Vec::new() }
    }

    pub fn eval(&self, zeta: f64) -> Result<f64> {
        if let Some(p) = &self.profile {
            return Ok(p.eval(zeta));
        }
        self.zeta_grid.interpolate(&self.values, zeta)
    }

    /// A profile view of the data: the closed form if present, otherwise the
    /// interpolant, held constant below the first sample and zero beyond the last.
    pub fn as_profile(&self) -> SpectralProfile {
        if let Some(p) = &self.profile {
            return p.clone();
        }
        let grid = self.zeta_grid.clone();
        let values = self.values.clone();
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let last = values.iter().rposition(|v| v.abs() > PROFILE_FLOOR * peak).unwrap_or(0);
        let end = (last + 1).min(values.len() - 1);
        let lo = grid.min();
        let hi = grid.points()[end];
        let knots: Vec<f64> = grid.points()[..=end].to_vec();
        let v0 = values[0];
        let mut p = SpectralProfile::new(
            move |z| {
                if z < lo {
                    v0
                } else if z > hi {
                    0.0
                } else {
                    grid.interpolate(&values, z).unwrap_or(0.0)
                }
            },
            hi,
            PowerSeries::default(),
        );
        p.knots = Some(Arc::new(knots));
        p
    }
}

/// Simpson-type integral of samples `w(r)` over `d(log r)`, i.e. `int w(r) dr / r`.
pub(crate) fn simpson_log(r: &[f64], w: &[f64]) -> f64 {
    let t: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    trapezoid_refined(&t, w)
}

/// Composite rule on a possibly non-uniform grid: trapezoid with an end-corrected
/// cubic refinement per interval.
pub(crate) fn trapezoid_refined(t: &[f64], w: &[f64]) -> f64 {
    let n = t.len();
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let lo = i.saturating_sub(1).min(n.saturating_sub(4));
        let (a, b) = (t[i], t[i + 1]);
        // two-point Gauss on the local cubic interpolant
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let g = h / 3f64.sqrt();
        let mut s = 0.0;
        for x in [c - g, c + g] {
            let mut v = 0.0;
            for p in lo..lo + 4 {
                let mut l = 1.0;
                for q in lo..lo + 4 {
                    if p != q {
                        l *= (x - t[q]) / (t[p] - t[q]);
                    }
                }
                v += l * w[p];
            }
            s += v;
        }
        acc += s * h;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grids_validate() {
        assert!(RadialGrid::new(vec![0.0, 1.0, 2.0, 3.0]).is_err());
        assert!(RadialGrid::new(vec![1.0, 1.0, 2.0, 3.0]).is_err());
        let g = RadialGrid::log(1e-3, 1e2, 2048).unwrap();
        assert_eq!(g.len(), 2048);
        assert_eq!(g.min(), 1e-3);
        assert_eq!(g.max(), 1e2);
    }

    #[test]
    fn interpolation_accuracy_and_extrapolation() {
        let g = RadialGrid::log(1e-2, 10.0, 400).unwrap();
        let f = RadialFunction::from_fn(&g, 2, |r| (-r * r).exp()).unwrap();
        for r in [0.0123, 0.5, 1.777, 9.99] {
            assert!((f.eval(r).unwrap() - (-r * r).exp()).abs() < 1e-6, "r={r} {}", f.eval(r).unwrap() - (-r * r).exp());
        }
        assert!(matches!(f.eval(11.0), Err(Error::Extrapolation { .. })));
        assert!(f.eval(0.001).is_err());
        let lin = RadialGrid::linear(0.1, 3.0, 300).unwrap();
        let h = RadialFunction::from_fn(&lin, 2, |r| r.sin()).unwrap();
        assert!((h.eval(1.2345).unwrap() - 1.2345f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn l2_norm_of_gaussian() {
        let g = RadialGrid::log(1e-4, 12.0, 1200).unwrap();
        let f = RadialFunction::from_fn(&g, 3, |r| (-r * r / 2.0).exp()).unwrap();
        // int e^{-r^2} r^2 dr = sqrt(pi)/4
        assert_relative_eq!(f.l2_norm_sq(), std::f64::consts::PI.sqrt() / 4.0, max_relative = 1e-9);
    }

    #[test]
    fn series_algebra() {
        let a = PowerSeries::new(vec![(0.0, 1.0), (1.0, 2.0)]);
        let b = PowerSeries::new(vec![(0.0, 1.0), (1.0, -1.0)]);
        let c = a.mul(&b, 8);
        assert_eq!(c.terms, vec![(0.0, 1.0), (1.0, 1.0), (2.0, -2.0)]);
        assert_relative_eq!(c.eval(0.5), 1.0 + 0.5 - 0.5);
        assert_eq!(a.compose_power(2.0).terms[1].0, 2.0);
    }
}
