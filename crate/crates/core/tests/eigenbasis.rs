use levy_spectral::eigenbasis::*;
use levy_spectral::mellin::{eigen_mellin, inverse_mellin_point, lambda_multiplier, theta_symbol, u_mellin};
use levy_spectral::quad::{integrate_breaks, QuadConfig};
use levy_spectral::radial_transforms::{fractional_laplacian, gaussian};
use levy_spectral::specfun::{bessel_i, bessel_j, gamma_real, laguerre, log_gamma};
use levy_spectral::{Params, RadialGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn par(s: f64, n: u32) -> Params {
    Params::new(s, n).unwrap()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

fn geometric_breaks(a: f64, b: f64, count: usize) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend((0..=count).map(|i| a * (b / a).powf(i as f64 / count as f64)));
    v
}

fn quad(f: impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    integrate_breaks(&f, breaks, &QuadConfig { rel_tol: 1e-14, ..QuadConfig::default() }).value
}

#[test]
fn three_routes_agree() {
    for &(s, n, nu, r0) in &[(0.75, 2u32, 1.0, 0.5), (0.5, 3, 2.0, 0.5), (0.3, 2, 1.0, 2.0)] {
        let e = EigenFunction::new(par(s, n), nu).unwrap();
        for i in 0..=16 {
            let r = r0 * (5.0f64 / r0).powf(i as f64 / 16.0);
            let f = e.eval_route(Route::Fourier, r).unwrap();
            let se = e.eval_route(Route::Series, r).unwrap();
            let m = e.eval_route(Route::MellinResidue, r).unwrap();
            for (a, b) in [(f, se), (f, m), (se, m)] {
                assert!((a - b).abs() < 1e-6 * f.abs(), "s={s} r={r}: {f} {se} {m}");
            }
        }
    }
}

#[test]
fn series_below_threshold_is_out_of_regime() {
    let p = par(0.3, 2);
    let e = EigenFunction::new(p, 1.0).unwrap();
    let t = e.series_threshold().unwrap();
    assert!(e.eval_route(Route::Series, 0.5 * t).is_err());
    let (a, b) = (e.eval(0.5 * t).unwrap(), e.eval_route(Route::Fourier, 0.5 * t).unwrap());
    assert!((a - b).abs() < 1e-10 * b.abs());
}

#[test]
fn critical_case_large_radius_uses_closed_form() {
    let p = par(0.5, 2);
    let e = EigenFunction::new(p, 1.0).unwrap();
    for r in [1.0, 3.0, 20.0] {
        let a = e.eval_route(Route::Series, r).unwrap();
        let b = e.eval_route(Route::Fourier, r).unwrap();
        assert!((a - b).abs() < 1e-9 * b.abs(), "r={r} {a} {b}");
    }
}

#[test]
fn mellin_normalized_series_value_at_origin() {
    let p = par(0.75, 2);
    let v = eigen_series(&p, 1.0, 0.0).unwrap();
    let expected = 2.0 * gamma_real(1.0 + 2.0 / 1.5).unwrap() / gamma_real(1.0).unwrap();
    assert!((v.value - expected).abs() < 1e-14 * expected);
    assert!((v.to_canonical * mellin_normalization(&p) - 1.0).abs() < 1e-15);
}

fn mellin_point(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]
    #[test]
    fn mellin_functional_equation(x in -1.5f64..5.0, y in 0.2f64..15.0, k in 0usize..4) {
        let p = par(0.6, 3);
        let nu = k as f64;
        let z = mellin_point(x, y);
        let lhs = theta_symbol(&p, z).unwrap() * eigen_mellin(&p, nu, z - 1.2).unwrap();
        let rhs = (nu + (3.0 - z) / 1.2) * eigen_mellin(&p, nu, z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm(), "{} {}", lhs, rhs);
    }

    #[test]
    fn mellin_splitting(x in -1.5f64..5.0, y in 0.2f64..15.0, nu in -0.5f64..3.0, s in 0.2f64..0.95) {
        let p = par(s, 2);
        let z = mellin_point(x, y);
        let a = eigen_mellin(&p, nu, z).unwrap();
        let b = lambda_multiplier(&p, z).unwrap() * u_mellin(&p, nu, z).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm(), "{} {}", a, b);
    }
}

#[test]
fn gram_matrices_are_diagonal_with_closed_form_norms() {
    for &(s, n) in &[(0.3, 2u32), (0.5, 2), (0.5, 3), (0.75, 3), (1.0, 2)] {
        let p = par(s, n);
        let g = eigen_gram_dagger(&p, 4).unwrap();
        assert!(g.max_offdiag < 1e-10 && g.max_diag_error < 1e-10 && g.asymmetry < 1e-12, "s={s} n={n} {g:?}");
        let h = adjoint_gram_ddagger(&p, 4).unwrap();
        assert!(h.max_offdiag < 1e-10 && h.max_diag_error < 1e-10, "s={s} n={n} {h:?}");
        let d = duality_matrix(&p, 4).unwrap();
        assert!(d.max_offdiag < 1e-10 && d.max_diag_error < 1e-10, "s={s} n={n} {d:?}");
    }
}

#[test]
fn dagger_norm_by_direct_quadrature() {
    // at s = 1 the dagger product is int u^2 e^{r^2/4} r^{n-1} dr
    for n in [2u32, 3] {
        let p = par(1.0, n);
        for k in 0..3 {
            let e = EigenFunction::basis(p, k);
            let br = geometric_breaks(0.05, 30.0, 40);
            let direct = quad(|r| e.eval(r).unwrap().powi(2) * (0.25 * r * r).exp() * r.powi(n as i32 - 1), &br);
            let g = inner_dagger(&e, &e, &p).unwrap();
            assert!((g - direct).abs() < 1e-9 * direct, "n={n} k={k} {g} {direct}");
            assert!((g - dagger_norm_sq(&p, k)).abs() < 1e-9 * direct);
        }
    }
}

#[test]
fn ddagger_at_s_one_is_weighted_l2() {
    let p = par(1.0, 3);
    let w1 = AdjointEigenFunction::new(p, 1);
    let w2 = AdjointEigenFunction::new(p, 2);
    let br = geometric_breaks(0.05, 80.0, 40);
    for (a, b) in [(w1, w1), (w1, w2), (w2, w2)] {
        let direct = quad(|r| a.ddagger(r) * b.ddagger(r) * (-0.25 * r * r).exp() * r * r, &br);
        let g = inner_ddagger(&a, &b, &p).unwrap();
        assert!((g - direct).abs() < 1e-10 * (1.0 + direct.abs()), "{g} {direct}");
    }
}

#[test]
fn duality_routes_reconcile_on_gaussians() {
    for &(s, n) in &[(0.5, 2u32), (0.75, 3), (1.0, 2)] {
        let p = par(s, n);
        let g = RadialGrid::log(1e-4, 12.0, 3000).unwrap();
        let u = gaussian(&g, n, 1.0).unwrap();
        let w = u.scaled(3.0);
        let rep = duality_pairing(&u, &w, &p).unwrap();
        let nf = n as f64;
        let expected = 2f64.powf(nf / s - nf) * 3.0 * gamma_real(0.5 * nf).unwrap() / (2.0 * 2f64.powf(0.5 * nf));
        assert!((rep.value - expected).abs() < 1e-9 * expected, "s={s} n={n} {rep:?} {expected}");
        assert!(rep.diff <= 1e-8 * expected);
        if s == 1.0 {
            assert!(rep.diff <= 1e-12 * expected);
        }
    }
}

#[test]
fn reconciliation_failure_is_reported() {
    // samples disagree with the attached transform at the 1e-6 level
    let p = par(0.5, 2);
    let g = RadialGrid::log(1e-4, 12.0, 3000).unwrap();
    let u = gaussian(&g, 2, 1.0).unwrap();
    let mut w = u.clone();
    for v in w.values.iter_mut() {
        *v *= 1.0 + 1e-6;
    }
    let res = duality_pairing(&u, &w, &p);
    assert!(matches!(res, Err(levy_spectral::Error::Reconciliation { .. })), "{res:?}");
    assert!(duality_pairing_tol(&u, &w, &p, 1e-5).is_ok());
}

#[test]
fn script_l_frak_l_biorthogonality() {
    for &(s, n) in &[(0.5, 2u32), (0.7, 3)] {
        let p = par(s, n);
        let nf = n as f64;
        let expected = 2.0 * s * 2f64.powf(nf / s);
        let hi = (4.0 * 120.0f64).powf(0.5 / s);
        let br = geometric_breaks(1e-3, hi, 80);
        for j in 0..=3 {
            for k in 0..=3 {
                let v = quad(|r| script_l(&p, j, r) * frak_l(&p, k, r) * r.powf(nf - 1.0), &br);
                if j == k {
                    assert!((v - expected).abs() < 1e-8 * expected, "s={s} n={n} j={j} {v} {expected}");
                } else {
                    assert!(v.abs() < 1e-8 * expected, "s={s} n={n} j={j} k={k} {v}");
                }
            }
        }
    }
}

#[test]
fn frak_l_and_script_l_at_k_zero() {
    let p = par(0.35, 3);
    let r: f64 = 1.7;
    let rho = 0.25 * r.powf(0.7);
    assert!((frak_l(&p, 0, r) - 0.7 / gamma_real(1.5).unwrap()).abs() < 1e-15);
    let expected = 0.7 * rho.powf(1.5 - 3.0 / 0.7) * (-rho).exp();
    assert!((script_l(&p, 0, r) - expected).abs() < 1e-14 * expected);
}

#[test]
fn u_nu_integer_index_is_script_l() {
    for &(s, n) in &[(0.4, 2u32), (0.8, 3)] {
        let p = par(s, n);
        for k in 0..4 {
            for r in [0.3, 2.0, 9.0] {
                let a = u_nu(&p, k as f64, r).unwrap();
                let b = script_l(&p, k, r);
                assert!((a - b).abs() < 1e-10 * b.abs().max(1e-300), "s={s} k={k} r={r} {a} {b}");
            }
        }
    }
}

#[test]
fn u_nu_matches_contour_quadrature() {
    let p = par(0.6, 3);
    let (nu, b) = (-2.6, 1.5);
    let f = move |z: Complex64| -> levy_spectral::Result<Complex64> {
        Ok((log_gamma(Complex64::new(nu + b, 0.0) - z)? + log_gamma(z)? - log_gamma(Complex64::new(b, 0.0) - z)?).exp())
    };
    for r in [2.0f64, 10.0, 40.0] {
        let rho = 0.25 * r.powf(1.2);
        let oracle = 1.2 * rho.powf(1.5 - 2.5) * inverse_mellin_point(&f, 0.3, rho, 0.01).unwrap();
        let v = u_nu(&p, nu, r).unwrap();
        assert!((v - oracle).abs() < 1e-8 * oracle.abs(), "r={r} {v} {oracle}");
    }
}

#[test]
fn u_nu_integer_asymptotics() {
    let (s, n, k) = (0.6, 3u32, 2usize);
    let p = par(s, n);
    let r: f64 = 200.0;
    let rho = 0.25 * r.powf(2.0 * s);
    let lead = 2.0 * s * (-rho).exp() * rho.powf(k as f64 + 1.5 - 2.5);
    let ratio = u_nu(&p, k as f64, r).unwrap() / lead;
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn u_nu_noninteger_asymptotics() {
    let p = par(0.6, 3);
    let nu = -2.6;
    let rho = |r: f64| 0.25 * r.powf(1.2);
    let ratio_lit = |r: f64| u_nu(&p, nu, r).unwrap().abs() / rho(r).powf(-nu - 2.5);
    // regression value at r = 10, confirmed by the contour test above
    assert!((ratio_lit(10.0) - 2.846815895564e-2).abs() < 1e-10);
    // the ratio decays like rho^{-2}: two poles lie left of the contour
    let slope = (ratio_lit(1000.0) / ratio_lit(100.0)).ln() / (rho(1000.0) / rho(100.0)).ln();
    assert!((slope + 2.0).abs() < 0.01, "{slope}");
    let (c, e) = u_nu_leading_tail(&p, nu).unwrap();
    let mut prev = f64::INFINITY;
    for r in [10.0, 100.0, 1000.0] {
        let dev = (u_nu(&p, nu, r).unwrap() / (c * rho(r).powf(e)) - 1.0).abs();
        assert!(dev < prev);
        prev = dev;
    }
    assert!(prev < 2e-4);
}

#[test]
fn u_nu_degenerate_index() {
    let p = par(0.5, 2);
    assert!(u_nu(&p, -1.0, 1.0).is_err());
    assert!(u_nu(&p, -0.5, 0.0).is_err());
}

#[test]
fn local_eigenfunctions_are_laguerre() {
    for n in [1u32, 2, 3] {
        let p = par(1.0, n);
        let nf = n as f64;
        for k in 0..6 {
            let e = EigenFunction::basis(p, k);
            for r in [0.1, 0.9, 2.4, 5.0, 9.0] {
                let x = 0.25 * r * r;
                let exact = 2f64.powf(-0.5 * nf) * factorial(k) * laguerre(k, 0.5 * nf - 1.0, x) * (-x).exp();
                let f = e.eval_route(Route::Fourier, r).unwrap();
                assert!((f - exact).abs() < 1e-8 * exact.abs().max(1e-3), "n={n} k={k} r={r} {f} {exact}");
            }
        }
    }
}

#[test]
fn fractional_laplacian_shifts_the_index() {
    for &(s, n) in &[(0.4, 2u32), (0.75, 3)] {
        let p = par(s, n);
        let g = RadialGrid::log(1e-2, 20.0, 400).unwrap();
        for k in 0..3 {
            let e = EigenFunction::basis(p, k).sample(&g).unwrap();
            let le = fractional_laplacian(&e, &p).unwrap();
            let next = EigenFunction::basis(p, k + 1);
            for i in (0..g.len()).step_by(37) {
                let r = g.points()[i];
                let want = next.eval(r).unwrap();
                assert!((le.values[i] - want).abs() < 1e-9 * (1.0 + want.abs()), "s={s} k={k} r={r}");
            }
        }
    }
}

#[test]
fn eigen_residual_small() {
    let g = RadialGrid::log(5e-3, 60.0, 2350).unwrap();
    for &(s, n) in &[(0.3, 3u32), (0.75, 2)] {
        let p = par(s, n);
        for k in [0usize, 3, 5] {
            let r = eigen_residual(&p, k, &g, 1e-2, 30.0).unwrap();
            assert!(r < 1e-6, "s={s} n={n} k={k} {r}");
        }
    }
}

#[test]
fn watson_identity_by_quadrature() {
    let (z1, z2, n) = (1.0f64, 1.7f64, 3u32);
    let nu = 0.5 * n as f64 - 1.0;
    let br: Vec<f64> = (0..=80).map(|i| i as f64 * 0.5).collect();
    let lhs = quad(|x| (-0.25 * x * x).exp() * bessel_j(nu, z1 * x) * bessel_j(nu, z2 * x) * x, &br);
    let rhs = 2.0 * (-(z1 * z1 + z2 * z2)).exp() * bessel_i(nu, 2.0 * z1 * z2);
    assert!((lhs - rhs).abs() < 1e-10 * rhs, "{lhs} {rhs}");
    let k = adjoint_kernel_k(&par(0.5, n), z1, z2).unwrap();
    assert!((k - 0.25 * (z1 * z2).powf(-0.5 * n as f64) * lhs).abs() < 1e-10 * k);
}

#[test]
fn kernel_is_stable_for_large_arguments() {
    let p = par(0.5, 2);
    let v = adjoint_kernel_k(&p, 300.0, 300.5).unwrap();
    assert!(v.is_finite() && v > 0.0);
    let near = adjoint_kernel_k(&p, 300.0, 300.0).unwrap();
    assert!((v / near - (-0.25f64).exp()).abs() < 1e-2);
}
