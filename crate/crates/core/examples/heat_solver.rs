//! Fractional heat equation: spectral solution against the Fourier-multiplier oracle.

use levy_spectral::heat::*;
use levy_spectral::{Params, RadialGrid};

fn main() -> levy_spectral::Result<()> {
    let p = Params::new(0.6, 2)?;
    let g = RadialGrid::log(1e-2, 30.0, 161)?;
    let u0 = Preset::Gaussian.sample(&p, &g)?;
    let sol = HeatSolution::from_initial(&u0, p, DEFAULT_MODES, &g)?;
    println!("coefficients: {:?}", sol.coefficients);
    for t in [0.5, 2.0, 10.0, 100.0] {
        let spectral = evolve_physical(&sol, t, &g)?;
        let oracle = evolve_fourier_oracle(&u0, &p, t)?;
        let lead = leading_asymptotics(&sol, t, &g)?;
        println!(
            "t = {t:>6}: spectral vs oracle {:.2e}, leading-order error {:.2e}",
            l2_relative_error(&spectral, &oracle)?,
            l2_relative_error(&spectral, &lead)?
        );
    }
    let kernel = greens_function(&p, 1.0, &g)?;
    println!("heat kernel at t = 1: G(0.01) = {:.12e}, mass {:.12e}", kernel.values[0], kernel.mass());
    Ok(())
}
