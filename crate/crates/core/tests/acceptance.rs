//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use levy_spectral::eigenbasis::*;
use levy_spectral::heat::*;
use levy_spectral::mellin::*;
use levy_spectral::quad::{integrate_breaks, QuadConfig};
use levy_spectral::radial_transforms::{fractional_laplacian, gaussian, hankel_quadrature_at};
use levy_spectral::specfun::{bessel_j, gamma_real, laguerre, log_gamma, stirling_modulus_ratio};
use levy_spectral::{Params, RadialGrid};
use num_complex::Complex64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use std::f64::consts::PI;
use std::time::Instant;

const S_VALUES: [f64; 4] = [0.3, 0.5, 0.75, 1.0];
const N_VALUES: [u32; 2] = [2, 3];

type Outcome = Result<String, String>;

fn par(s: f64, n: u32) -> Params {
    Params::new(s, n).unwrap()
}

fn matrix() -> Vec<Params> {
    S_VALUES.iter().flat_map(|&s| N_VALUES.iter().map(move |&n| par(s, n))).collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn half_gamma(z: Complex64) -> Complex64 {
    0.5 * log_gamma(z / 2.0).unwrap().exp()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Collects failures of one criterion and reports the worst value seen.
struct Tally {
    worst: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { worst: 0.0, failures: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, value: f64, tol: f64) {
        if value.is_finite() {
            self.worst = self.worst.max(value);
        }
        if !(value.is_finite() && value < tol) {
            self.failures.push(format!("{} = {value:.3e} (tol {tol:.0e})", label.into()));
        }
    }

    fn finish(self, summary: String) -> Outcome {
        if self.failures.is_empty() {
            Ok(summary)
        } else {
            let shown: Vec<&str> = self.failures.iter().take(4).map(|s| s.as_str()).collect();
            Err(format!("{summary}; {} failed: {}", self.failures.len(), shown.join("; ")))
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid = RadialGrid::log(5e-3, 60.0, 2350).unwrap();
    let mut t = Tally::new();
    for p in matrix() {
        for k in 0..=5 {
            let r = eigen_residual(&p, k, &grid, 1e-2, 30.0).map_err(|e| e.to_string())?;
            t.check(format!("s={} n={} k={k}", p.s(), p.n()), r, 1e-6);
        }
    }
    let worst = t.worst;
    let secs = start.elapsed().as_secs_f64();
    t.check("runtime [s]", secs, 60.0);
    t.finish(format!("max residual {worst:.2e}, {secs:.1} s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut t = Tally::new();
    for &(s, n, nu, r0) in &[(0.75, 2u32, 1.0, 0.5), (0.5, 3, 2.0, 0.5), (0.3, 2, 1.0, 2.0)] {
        let e = EigenFunction::new(par(s, n), nu).map_err(|e| e.to_string())?;
        for i in 0..=24 {
            let r = r0 * (5.0f64 / r0).powf(i as f64 / 24.0);
            let f = e.eval_route(Route::Fourier, r).map_err(|e| e.to_string())?;
            let se = e.eval_route(Route::Series, r).map_err(|e| e.to_string())?;
            let m = e.eval_route(Route::MellinResidue, r).map_err(|e| e.to_string())?;
            let scale = f.abs().max(se.abs()).max(m.abs());
            let d = (f - se).abs().max((f - m).abs()).max((se - m).abs()) / scale;
            t.check(format!("s={s} n={n} nu={nu} r={r:.3}"), d, 1e-6);
        }
    }
    let worst = t.worst;
    let secs = start.elapsed().as_secs_f64();
    t.check("runtime [s]", secs, 120.0);
    t.finish(format!("max pairwise difference {worst:.2e}, {secs:.1} s"))
}

fn max_offdiag(g: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..g.len() {
        for j in 0..g.len() {
            if i != j {
                worst = worst.max(g[i][j].abs() / (g[i][i] * g[j][j]).abs().sqrt());
            }
        }
    }
    worst
}

fn criterion_3() -> Outcome {
    let mut t = Tally::new();
    let (mut diag_worst, mut off_worst) = (0.0f64, 0.0f64);
    for p in matrix() {
        let (s, n) = (p.s(), p.nf());
        let gd = eigen_gram_dagger(&p, 4).map_err(|e| e.to_string())?.gram;
        let gw = adjoint_gram_ddagger(&p, 4).map_err(|e| e.to_string())?.gram;
        let g0 = gamma_real(0.5 * n).unwrap();
        for k in 0..=4 {
            let gk = gamma_real(k as f64 + 0.5 * n).unwrap();
            let want_d = 2.0 * s * factorial(k) * 2f64.powf(n / s) * gk / g0;
            let want_w = 2f64.powf(n) * gk / (factorial(k) * g0);
            let (ed, ew) = (rel(gd[k][k], want_d), rel(gw[k][k], want_w));
            diag_worst = diag_worst.max(ed).max(ew);
            t.check(format!("dagger diag s={s} n={n} k={k}"), ed, 1e-6);
            t.check(format!("ddagger diag s={s} n={n} k={k}"), ew, 1e-6);
        }
        off_worst = off_worst.max(max_offdiag(&gd)).max(max_offdiag(&gw));
        t.check(format!("dagger off-diagonal s={s} n={n}"), max_offdiag(&gd), 1e-6);
        t.check(format!("ddagger off-diagonal s={s} n={n}"), max_offdiag(&gw), 1e-6);
    }
    t.finish(format!("max diagonal deviation {diag_worst:.2e}, max off-diagonal {off_worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut t = Tally::new();
    let (mut diag_worst, mut off_worst, mut route_worst) = (0.0f64, 0.0f64, 0.0f64);
    let g = RadialGrid::log(1e-4, 12.0, 3000).unwrap();
    for p in matrix() {
        let (s, n) = (p.s(), p.nf());
        let want = 2.0 * s * 2f64.powf(n / s) / gamma_real(0.5 * n).unwrap();
        let d = duality_matrix(&p, 4).map_err(|e| e.to_string())?.gram;
        for j in 0..=4 {
            for k in 0..=4 {
                if j == k {
                    let e = rel(d[j][k], want);
                    diag_worst = diag_worst.max(e);
                    t.check(format!("(e_{j}, omega_{k}) s={s} n={n}"), e, 1e-6);
                } else {
                    off_worst = off_worst.max(d[j][k].abs() / want);
                    t.check(format!("(e_{j}, omega_{k}) s={s} n={n}"), d[j][k].abs() / want, 1e-6);
                }
            }
        }
        let u = gaussian(&g, p.n(), 1.0).map_err(|e| e.to_string())?;
        let w = u.scaled(3.0);
        match duality_pairing_tol(&u, &w, &p, f64::INFINITY) {
            Ok(rep) => {
                route_worst = route_worst.max(rep.diff / rep.value.abs());
                t.check(format!("route (a)/(b) s={s} n={n}"), rep.diff / rep.value.abs(), 1e-8)
            }
            Err(e) => t.check(format!("route (a)/(b) s={s} n={n}: {e}"), f64::NAN, 1e-8),
        }
    }
    t.finish(format!("max diagonal deviation {diag_worst:.2e}, max off-diagonal {off_worst:.2e}, route (a)/(b) {route_worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut t = Tally::new();
    let g = RadialGrid::log(1e-3, 1e3, 3000).unwrap();
    for &(s, n) in &[(0.3, 2u32), (0.4, 3), (0.5, 2), (0.75, 2), (0.75, 3)] {
        let p = par(s, n);
        let u = gaussian(&g, n, 1.0).map_err(|e| e.to_string())?;
        let lu = fractional_laplacian(&u, &p).map_err(|e| e.to_string())?;
        let line = VerticalLine::new(n as f64 / 2.0 + s, vec![-3.0, 0.0, 1.3, 4.0]).unwrap();
        let m = mellin_transform_numeric(&lu, &line).map_err(|e| e.to_string())?;
        for (i, z) in line.points().enumerate() {
            let e = theta_symbol(&p, z).unwrap() * half_gamma(z - 2.0 * s);
            t.check(format!("Mellin identity s={s} n={n} z={z}"), (m.values[i] - e).norm() / e.norm(), 1e-6);
        }
    }
    let zs = [cz(0.7, 0.3), cz(1.3, -2.0), cz(2.5, 4.0), cz(0.2, 11.0), cz(-1.5, 0.8)];
    for n in [1u32, 2, 3] {
        let p = par(1.0, n);
        for z in zs {
            let want = (z - 2.0) * (n as f64 - z);
            t.check(format!("local symbol n={n} z={z}"), (theta_symbol(&p, z).unwrap() - want).norm() / want.norm(), 1e-10);
        }
    }
    for &(s, n, l) in &[(0.6, 3u32, 2.7), (0.4, 2, 0.4), (0.9, 3, 7.5), (1.0, 2, 1.1)] {
        let (h, q) = (par(0.5 * s, n), par(s, n));
        let half = 0.5 * n as f64;
        let lhs = theta_symbol(&h, cz(half, l)).unwrap() * theta_symbol(&h, cz(half, -l)).unwrap();
        let rhs = theta_symbol(&q, cz(half + s, l)).unwrap();
        t.check(format!("doubling s={s} n={n} lambda={l}"), (lhs - rhs).norm() / rhs.norm(), 1e-10);
    }
    for p in matrix() {
        let ratios: Vec<f64> =
            [1e2, 1e3, 1e4].iter().map(|&l: &f64| theta_symbol(&p, cz(0.5 * p.nf(), l)).unwrap().norm() / l.powf(2.0 * p.s())).collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        t.check(format!("growth s={} n={}", p.s(), p.n()), hi / lo - 1.0, 0.05);
    }
    let worst = t.worst;
    t.finish(format!("worst check {worst:.2e}"))
}

fn dist_to_nonpositive_integers(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        (x - x.round()).abs()
    }
}

fn criterion_6() -> Outcome {
    let mut t = Tally::new();
    let mut runner = TestRunner::deterministic();
    let strategy = (-2.0f64..2.5, -3.0f64..2.0, 0.3f64..3.0, 0.2f64..4.0);
    let mut accepted = 0;
    while accepted < 20 {
        let (sigma, nu, b, rho) = strategy.new_tree(&mut runner).unwrap().current();
        if dist_to_nonpositive_integers(sigma) <= 0.15
            || dist_to_nonpositive_integers(nu + b) <= 0.15
            || dist_to_nonpositive_integers(nu + b - sigma) <= 0.15
        {
            continue;
        }
        accepted += 1;
        let f = move |z: Complex64| -> levy_spectral::Result<Complex64> {
            Ok((log_gamma(cz(nu + b, 0.0) - z)? + log_gamma(z)? - log_gamma(cz(b, 0.0) - z)?).exp())
        };
        let quad = inverse_mellin_point(&f, sigma, rho, 0.02).map_err(|e| e.to_string())?;
        let closed = residue_inverse_i(sigma, nu, b, rho).map_err(|e| e.to_string())?;
        t.check(format!("contour sigma={sigma:.3} nu={nu:.3} b={b:.3} rho={rho:.3}"), (quad - closed).abs() / (1.0 + closed.abs()), 1e-6);
    }
    let contour = t.worst;
    let mut lag = 0.0f64;
    for k in 0..=5usize {
        for &b in &[0.5, 1.0, 1.5, 2.7] {
            for &rho in &[0.1, 1.0, 3.5, 9.0] {
                let v = residue_inverse_i(0.5 * b, k as f64, b, rho).map_err(|e| e.to_string())?;
                let want = factorial(k) * (-rho).exp() * laguerre(k, b - 1.0, rho);
                let e = (v - want).abs() / want.abs().max(factorial(k) * (-rho).exp());
                lag = lag.max(e);
                t.check(format!("Laguerre k={k} b={b} rho={rho}"), e, 1e-10);
            }
        }
    }
    t.finish(format!("contour {contour:.2e}, Laguerre {lag:.2e}"))
}

fn criterion_7() -> Outcome {
    let mut t = Tally::new();
    let g = RadialGrid::log(1e-2, 30.0, 161).unwrap();
    let mut oracle_worst = 0.0f64;
    for &(s, n) in &[(0.5, 2u32), (0.75, 2), (0.75, 3), (1.0, 3)] {
        let p = par(s, n);
        let c = [1.0, -0.4, 0.3, 0.2, -0.1];
        let u0 = Preset::Modes(c.iter().cloned().enumerate().collect()).sample(&p, &g).map_err(|e| e.to_string())?;
        let sol = HeatSolution::from_initial(&u0, p, 4, &g).map_err(|e| e.to_string())?;
        for tp in [0.5, 2.0, 10.0] {
            let a = evolve_physical(&sol, tp, &g).map_err(|e| e.to_string())?;
            let b = evolve_fourier_oracle(&u0, &p, tp).map_err(|e| e.to_string())?;
            let e = l2_relative_error(&a, &b).map_err(|e| e.to_string())?;
            oracle_worst = oracle_worst.max(e);
            t.check(format!("oracle s={s} n={n} t={tp}"), e, 1e-5);
        }
        for k in 1..=4usize {
            let mut coeffs = vec![0.0; k + 1];
            coeffs[k] = 1.0;
            let single = HeatSolution::new(p, coeffs, &g).map_err(|e| e.to_string())?;
            let n0 = evolve_spectral(&single, 0.0).map_err(|e| e.to_string())?.l2_norm_sq().sqrt();
            for tt in [0.25, 1.0, 3.0] {
                let n1 = evolve_spectral(&single, tt).map_err(|e| e.to_string())?.l2_norm_sq().sqrt();
                let want = (-(k as f64) * tt).exp();
                t.check(format!("decay s={s} n={n} k={k} t~={tt}"), rel(n1 / n0, want), 1e-8);
            }
        }
    }
    let p = par(0.75, 2);
    let sol = HeatSolution::new(p, vec![1.0, -0.4, 0.3, 0.2, -0.1], &g).map_err(|e| e.to_string())?;
    let ts = [30.0f64, 100.0, 300.0, 1000.0];
    let mut errs = Vec::new();
    for &tp in &ts {
        let lg = RadialGrid::new(g.points().iter().map(|r| r * (1.0 + tp).powf(1.0 / 1.5)).collect()).unwrap();
        let full = evolve_physical(&sol, tp, &lg).map_err(|e| e.to_string())?;
        let lead = leading_asymptotics(&sol, tp, &lg).map_err(|e| e.to_string())?;
        errs.push(l2_relative_error(&full, &lead).map_err(|e| e.to_string())?);
    }
    let xs: Vec<f64> = ts.iter().map(|tp| 1.0 + tp).collect();
    let slope = loglog_slope(&xs, &errs);
    t.check("leading-order error slope in e^{t~} (+1)", (slope + 1.0).abs(), 0.1);
    t.finish(format!("oracle {oracle_worst:.2e}, leading-order slope {slope:.3}"))
}

fn hankel_raw(k: usize, r: f64) -> f64 {
    let f = |z: f64| z.powi(2 * k as i32 + 1) * (-z * z).exp() * bessel_j(0.0, r * z);
    let br: Vec<f64> = (0..=160).map(|i| i as f64 * 0.05).collect();
    integrate_breaks(&f, &br, &QuadConfig { rel_tol: 1e-13, ..QuadConfig::default() }).value
}

fn criterion_8() -> Outcome {
    let mut t = Tally::new();
    for n in [1u32, 2, 3] {
        let p = par(1.0, n);
        let nf = n as f64;
        for k in 0..=5 {
            let e = EigenFunction::basis(p, k);
            for r in [0.1, 0.9, 2.4, 5.0, 9.0] {
                let x = 0.25 * r * r;
                let exact = 2f64.powf(-0.5 * nf) * factorial(k) * laguerre(k, 0.5 * nf - 1.0, x) * (-x).exp();
                let v = e.eval(r).map_err(|e| e.to_string())?;
                t.check(format!("Laguerre n={n} k={k} r={r}"), (v - exact).abs() / exact.abs().max(1e-3), 1e-8);
            }
        }
    }
    let g = RadialGrid::log(1e-2, 30.0, 161).unwrap();
    for tp in [0.5, 1.0, 3.0] {
        let k = greens_function(&par(0.5, 1), tp, &g).map_err(|e| e.to_string())?;
        for (&r, &v) in g.points().iter().zip(&k.values) {
            t.check(format!("Poisson t={tp} r={r:.3}"), rel(v, tp / (PI * (tp * tp + r * r))), 1e-8);
        }
    }
    let prof = eigen_profile(&par(1.0, 2), 3.0);
    for r in [0.5f64, 2.0, 5.0] {
        let x = 0.25 * r * r;
        let want = 0.5 * factorial(3) * (-x).exp() * laguerre(3, 0.0, x);
        let h = hankel_quadrature_at(&prof, 2, r).map_err(|e| e.to_string())?;
        t.check(format!("Hankel identity r={r}"), rel(h, want), 1e-6);
        t.check(format!("Hankel identity (Bessel quadrature) r={r}"), rel(hankel_raw(3, r), want), 1e-6);
    }
    let worst = t.worst;
    t.finish(format!("worst relative error {worst:.2e}"))
}

fn criterion_9() -> Outcome {
    let mut t = Tally::new();
    let ls: Vec<f64> = (0..=8).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect();
    let mut slopes = Vec::new();
    for theta in [0.25, 1.7, 3.0] {
        let e: Vec<f64> = ls.iter().map(|&l| (stirling_modulus_ratio(theta, l).unwrap() - 1.0).abs()).collect();
        let slope = loglog_slope(&ls, &e);
        slopes.push(format!("Gamma theta={theta}: {slope:.3}"));
        t.check(format!("Gamma ratio slope theta={theta} (+1)"), (slope + 1.0).abs(), 0.1);
    }
    for &(s, n, sigma) in &[(0.3, 3u32, 1.5), (0.75, 2, 0.4)] {
        let p = par(s, n);
        let e: Vec<f64> = ls.iter().map(|&l| (lambda_asymptotic_ratio(&p, sigma, l).unwrap() - 1.0).abs()).collect();
        let slope = loglog_slope(&ls, &e);
        slopes.push(format!("multiplier s={s} n={n} sigma={sigma}: {slope:.3}"));
        t.check(format!("multiplier ratio slope s={s} n={n} (+1)"), (slope + 1.0).abs(), 0.1);
    }
    t.finish(format!("slopes {}", slopes.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("eigen-residual", criterion_1),
        ("three-route agreement", criterion_2),
        ("orthogonality constants", criterion_3),
        ("duality", criterion_4),
        ("symbol calculus", criterion_5),
        ("residue inversion", criterion_6),
        ("heat-solver oracle", criterion_7),
        ("classical reductions", criterion_8),
        ("Stirling and multiplier asymptotics", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(msg) => println!("criterion {} {name}: PASS ({msg})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({msg})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
