//! Quadrature kernels: globally adaptive Gauss-Kronrod (7/15), composite
//! Gauss-Legendre rules and Wynn's epsilon algorithm.

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Single 15-point Kronrod panel with QUADPACK error scaling.
pub fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = gk15_abs(f, a, b);
    (v, e)
}

/// As [`gk15`], also returning the integral of `|f|`.
pub fn gk15_abs<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut rabs = rk.abs();
    let mut fv = [0.0; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        rk += WGK[j] * (f1 + f2);
        rabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            rg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = rk * 0.5;
    let mut rasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        rasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let result = rk * h;
    let rabs = rabs * h.abs();
    let rasc = rasc * h.abs();
    let mut err = ((rk - rg) * h).abs();
    if rasc != 0.0 && err != 0.0 {
        err = rasc * (200.0 * err / rasc).powf(1.5).min(1.0);
    }
    if rabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * rabs);
    }
    (result, err, rabs)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Tolerance and budget for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Stop once the error is below this fraction of `int |f|`.
    pub l1_rel: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-13, abs_tol: 1e-300, max_panels: 4000, l1_rel: 0.0 }
    }
}

/// Globally adaptive integration over consecutive break points.
pub fn integrate_breaks<F: Fn(f64) -> f64 + ?Sized>(f: &F, breaks: &[f64], cfg: &QuadConfig) -> QuadResult {
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    let mut l1 = 0.0;
    for w in breaks.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e, a) = gk15_abs(f, w[0], w[1]);
        evals += 15;
        l1 += a;
        total += v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    let mut panels = heap.len();
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs()).max(cfg.l1_rel * l1);
        if err <= tol {
            return QuadResult { value: total, error: err, evals, converged: true };
        }
        if panels >= cfg.max_panels.max(breaks.len() + 8) {
            return QuadResult { value: total, error: err, evals, converged: false };
        }
        let p = match heap.pop() {
            Some(p) => p,
            None => return QuadResult { value: total, error: err, evals, converged: true },
        };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return QuadResult { value: total, error: err, evals, converged: false };
        }
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        panels += 1;
    }
}

/// Adaptive integration on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    integrate_breaks(f, &[a, b], cfg)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { z } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = mf * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels of `order` nodes.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut x = Vec::with_capacity(panels * order);
    let mut w = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in gx.iter().zip(&gw) {
            x.push(c + 0.5 * h * xi);
            w.push(0.5 * h * wi);
        }
    }
    (x, w)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns the
/// accelerated limit and a crude error estimate.
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    if n < 3 {
        let last = *sums.last().unwrap_or(&0.0);
        let prev = if n == 2 { sums[0] } else { last };
        return (last, (last - prev).abs());
    }
    let mut e_prev = vec![0.0; n + 1];
    let mut e_cur: Vec<f64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut best_err = (sums[n - 1] - sums[n - 2]).abs();
    let mut k = 0;
    while e_cur.len() > 1 {
        let mut next = Vec::with_capacity(e_cur.len() - 1);
        for i in 0..e_cur.len() - 1 {
            let d = e_cur[i + 1] - e_cur[i];
            let base = if k == 0 { 0.0 } else { e_prev[i + 1] };
            next.push(if d == 0.0 { f64::INFINITY } else { base + 1.0 / d });
        }
        e_prev = e_cur;
        e_cur = next;
        k += 1;
        if k % 2 == 0 && e_cur.len() >= 2 {
            let l = e_cur.len();
            let v = e_cur[l - 1];
            let e = (e_cur[l - 1] - e_cur[l - 2]).abs();
            if v.is_finite() && e < best_err {
                best = v;
                best_err = e;
            }
        }
        if e_cur.iter().any(|v| !v.is_finite()) {
            break;
        }
    }
    (best, best_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_and_singular() {
        let cfg = QuadConfig::default();
        let r = integrate(&|x: f64| x * x * x - x, 0.0, 2.0, &cfg);
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-14);
        let r = integrate(&|x: f64| x.powf(-0.4), 0.0, 1.0, &QuadConfig { rel_tol: 1e-12, ..cfg });
        assert_relative_eq!(r.value, 1.0 / 0.6, max_relative = 1e-10);
        assert!(r.converged);
    }

    #[test]
    fn legendre_rule_exact() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert_relative_eq!(s, 2.0 / 23.0, max_relative = 1e-14);
        let (x, w) = composite_gauss(0.0, 3.0, 4, 6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert_relative_eq!(s, 3f64.exp() - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn epsilon_accelerates_alternating() {
        let mut sums = Vec::new();
        let mut s = 0.0;
        for k in 0..24 {
            s += (-1f64).powi(k) / (2 * k + 1) as f64;
            sums.push(s);
        }
        let (v, _) = wynn_epsilon(&sums);
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-11);
    }
}
