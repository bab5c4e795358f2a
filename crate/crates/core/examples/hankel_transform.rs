//! Radial Hankel transforms and the fractional Laplacian on a sampled Gaussian.

use levy_spectral::radial_transforms::{fractional_laplacian, gaussian, hankel_forward, hankel_inverse};
use levy_spectral::{Params, RadialGrid};

fn main() -> levy_spectral::Result<()> {
    let n = 3;
    let r = RadialGrid::log(1e-3, 12.0, 1200)?;
    let u = gaussian(&r, n, 1.0)?;
    let zeta = RadialGrid::log(1e-3, 20.0, 400)?;
    let hat = hankel_forward(&u, &zeta)?;
    let back = hankel_inverse(&hat, &RadialGrid::log(0.1, 3.0, 5)?)?;
    for (x, v) in back.grid.points().iter().zip(&back.values) {
        println!("r = {x:.3}: round trip {v:.12e}, exact {:.12e}", (-x * x).exp());
    }
    let p = Params::new(1.0, n)?;
    let lap = fractional_laplacian(&u, &p)?;
    for i in (0..r.len()).step_by(300) {
        let x = r.points()[i];
        let exact = (6.0 - 4.0 * x * x) * (-x * x).exp();
        println!("r = {x:.3}: (-Laplacian) u = {:.12e}, exact {exact:.12e}", lap.values[i]);
    }
    Ok(())
}
