//! Mellin symbol of the fractional Laplacian, multiplier asymptotics and residue inversion.

use levy_spectral::mellin::*;
use levy_spectral::radial_transforms::{fractional_laplacian, gaussian};
use levy_spectral::specfun::{log_gamma, stirling_modulus_ratio};
use levy_spectral::{Params, RadialGrid};
use num_complex::Complex64;

fn main() -> levy_spectral::Result<()> {
    let (s, n) = (0.4, 3);
    let p = Params::new(s, n)?;
    let g = RadialGrid::log(1e-3, 1e3, 3000)?;
    let lu = fractional_laplacian(&gaussian(&g, n, 1.0)?, &p)?;
    let line = VerticalLine::new(1.5 + s, vec![0.0, 2.0, 5.0])?;
    let m = mellin_transform_numeric(&lu, &line)?;
    for (i, z) in line.points().enumerate() {
        let predicted = theta_symbol(&p, z)? * 0.5 * log_gamma((z - 2.0 * s) / 2.0)?.exp();
        println!("z = {z}: numeric {:.10e}, symbol {:.10e}", m.values[i], predicted);
    }
    for l in [1e2, 1e3, 1e4] {
        println!(
            "lambda = {l:e}: Gamma modulus ratio - 1 = {:.3e}, multiplier ratio - 1 = {:.3e}",
            stirling_modulus_ratio(1.7, l)? - 1.0,
            lambda_asymptotic_ratio(&p, 1.5, l)? - 1.0
        );
    }
    let (sigma, nu, b, rho) = (0.4, -0.7, 1.5, 2.0);
    let f = move |z: Complex64| -> levy_spectral::Result<Complex64> {
        Ok((log_gamma(Complex64::new(nu + b, 0.0) - z)? + log_gamma(z)? - log_gamma(Complex64::new(b, 0.0) - z)?).exp())
    };
    println!(
        "I(sigma={sigma}, nu={nu}, b={b}, rho={rho}): residues {:.12e}, contour {:.12e}",
        residue_inverse_i(sigma, nu, b, rho)?,
        inverse_mellin_point(&f, sigma, rho, 0.02)?
    );
    Ok(())
}
