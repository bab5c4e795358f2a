//! The verification suite behind `levy-spectral verify`.

use crate::eigenbasis::{
    adjoint_gram_ddagger, duality_matrix, eigen_gram_dagger, eigen_residual_of, EigenFunction, InnerProductReport, Route,
};
use crate::error::Result;
use crate::mellin::{lambda_asymptotic_ratio, theta_symbol};
use crate::params::Params;
use crate::radial::RadialGrid;
use crate::specfun::stirling_modulus_ratio;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub const DEFAULT_S_VALUES: [f64; 4] = [0.3, 0.5, 0.75, 1.0];
pub const DEFAULT_N_VALUES: [u32; 2] = [2, 3];
pub const DEFAULT_KMAX: usize = 3;

/// Window of the residual check and the grid it is sampled on.
pub const RESIDUAL_WINDOW: (f64, f64) = (1e-2, 30.0);
const RESIDUAL_GRID: (f64, f64, usize) = (5e-3, 60.0, 2350);
/// Radii of the three-route comparison.
const ROUTE_RANGE: (f64, f64, usize) = (0.5, 5.0, 9);

/// One named comparison against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub group: &'static str,
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn new(group: &'static str, name: String, value: f64, tol: f64) -> Self {
        Self { group, name, value, tol, pass: value.is_finite() && value <= tol }
    }
}

/// Gram and duality matrices of one `(s, n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramEntry {
    pub s: f64,
    pub n: u32,
    pub dagger: InnerProductReport,
    pub ddagger: InnerProductReport,
    pub duality: InnerProductReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub s_values: Vec<f64>,
    pub n_values: Vec<u32>,
    pub kmax: usize,
    /// Adds `eps e_{k+1}` to every `e_k` in the residual checks.
    pub perturb: Option<f64>,
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { s_values: DEFAULT_S_VALUES.to_vec(), n_values: DEFAULT_N_VALUES.to_vec(), kmax: DEFAULT_KMAX, perturb: None, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub grams: Vec<GramEntry>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self, opts: &VerifyOptions) -> Value {
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": "verify",
            "config": opts,
            "pass": self.passed(),
            "failures": self.failures().iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
            "checks": self.checks,
            "grams": self.grams,
        })
    }
}

fn tag(p: &Params) -> String {
    format!("s={} n={}", p.s(), p.n())
}

fn residual_checks(p: &Params, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let (a, b, m) = RESIDUAL_GRID;
    let grid = RadialGrid::log(a, b, m)?;
    let (lo, hi) = RESIDUAL_WINDOW;
    (0..=opts.kmax)
        .into_par_iter()
        .map(|k| {
            let mut u = EigenFunction::basis(*p, k).sample(&grid)?;
            let mut name = format!("residual {} k={k}", tag(p));
            if let Some(eps) = opts.perturb {
                u = u.combine(1.0, &EigenFunction::basis(*p, k + 1).sample(&grid)?, eps)?;
                name.push_str(&format!(" perturbed eps={eps}"));
            }
            Ok(Check::new("eigen-residual", name, eigen_residual_of(&u, k as f64, p, lo, hi)?, opts.tol))
        })
        .collect()
}

fn route_checks(p: &Params, opts: &VerifyOptions) -> Result<Vec<Check>> {
    let (a, b, m) = ROUTE_RANGE;
    let grid = RadialGrid::log(a, b, m)?;
    (0..=opts.kmax)
        .into_par_iter()
        .map(|k| {
            let e = EigenFunction::basis(*p, k);
            let f = e.clone().with_route(Route::Fourier).sample(&grid)?;
            let s = e.clone().with_route(Route::Series).sample(&grid)?;
            let mr = e.with_route(Route::MellinResidue).sample(&grid)?;
            let mut worst = 0.0f64;
            for i in 0..grid.len() {
                let (x, y, z) = (f.values[i], s.values[i], mr.values[i]);
                let scale = x.abs().max(y.abs()).max(z.abs());
                worst = worst.max((x - y).abs().max((x - z).abs()).max((y - z).abs()) / scale);
            }
            Ok(Check::new("three-route", format!("routes {} k={k}", tag(p)), worst, opts.tol))
        })
        .collect()
}

fn gram_checks(p: &Params, opts: &VerifyOptions) -> Result<(Vec<Check>, GramEntry)> {
    let dagger = eigen_gram_dagger(p, opts.kmax)?;
    let ddagger = adjoint_gram_ddagger(p, opts.kmax)?;
    let duality = duality_matrix(p, opts.kmax)?;
    let mut out = Vec::new();
    for (label, r) in [("dagger", &dagger), ("ddagger", &ddagger), ("duality", &duality)] {
        out.push(Check::new("gram", format!("{label} off-diagonal {}", tag(p)), r.max_offdiag, opts.tol));
        out.push(Check::new("gram", format!("{label} diagonal {}", tag(p)), r.max_diag_error, opts.tol));
    }
    Ok((out, GramEntry { s: p.s(), n: p.n(), dagger, ddagger, duality }))
}

fn symbol_growth(p: &Params) -> Result<Check> {
    let ratios = [1e2, 1e3, 1e4]
        .iter()
        .map(|&l: &f64| Ok(theta_symbol(p, Complex64::new(0.5 * p.nf(), l))?.norm() / l.powf(2.0 * p.s())))
        .collect::<Result<Vec<f64>>>()?;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    Ok(Check::new("symbol", format!("symbol growth {}", tag(p)), hi / lo - 1.0, 0.05))
}

fn global_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let zs = [Complex64::new(0.7, 0.3), Complex64::new(1.3, -2.0), Complex64::new(2.5, 4.0), Complex64::new(0.2, 11.0)];
    for &n in &opts.n_values {
        let p = Params::new(1.0, n)?;
        let mut worst = 0.0f64;
        for z in zs {
            let want = (z - 2.0) * (n as f64 - z);
            worst = worst.max((theta_symbol(&p, z)? - want).norm() / want.norm());
        }
        out.push(Check::new("symbol", format!("local symbol n={n}"), worst, 1e-10));
    }
    let (h, p, l) = (Params::new(0.3, 3)?, Params::new(0.6, 3)?, 2.7);
    let lhs = theta_symbol(&h, Complex64::new(1.5, l))? * theta_symbol(&h, Complex64::new(1.5, -l))?;
    let rhs = theta_symbol(&p, Complex64::new(2.1, l))?;
    out.push(Check::new("symbol", "doubling s=0.6 n=3".into(), (lhs - rhs).norm() / rhs.norm(), 1e-10));
    out.push(Check::new("stirling", "Gamma modulus theta=1 lambda=200".into(), (stirling_modulus_ratio(1.0, 200.0)? - 1.0).abs(), 0.01));
    let q = Params::new(0.5, 2)?;
    out.push(Check::new(
        "stirling",
        "multiplier s=0.5 n=2 sigma=1 lambda=1000".into(),
        (lambda_asymptotic_ratio(&q, 1.0, 1e3)? - 1.0).abs(),
        0.05,
    ));
    Ok(out)
}

/// Runs every check over the `(s, n)` matrix.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut grams = Vec::new();
    for &s in &opts.s_values {
        for &n in &opts.n_values {
            let p = Params::new(s, n)?;
            checks.extend(residual_checks(&p, opts)?);
            checks.extend(route_checks(&p, opts)?);
            let (c, g) = gram_checks(&p, opts)?;
            checks.extend(c);
            grams.push(g);
            checks.push(symbol_growth(&p)?);
        }
    }
    checks.extend(global_checks(opts)?);
    Ok(VerifyReport { checks, grams })
}
