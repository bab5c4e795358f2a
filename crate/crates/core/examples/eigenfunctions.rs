//! Eigenfunctions e_k of the fractional Fokker-Planck operator by three routes, with residuals.

use levy_spectral::eigenbasis::{eigen_residual, EigenFunction, Route};
use levy_spectral::{Params, RadialGrid};

fn main() -> levy_spectral::Result<()> {
    let p = Params::new(0.75, 2)?;
    let e = EigenFunction::new(p, 1.0)?;
    println!("{:>6} {:>22} {:>22} {:>22}", "r", "fourier", "series", "mellin");
    for r in [0.5, 1.0, 2.0, 3.5, 5.0] {
        println!(
            "{r:>6} {:>22.15e} {:>22.15e} {:>22.15e}",
            e.eval_route(Route::Fourier, r)?,
            e.eval_route(Route::Series, r)?,
            e.eval_route(Route::MellinResidue, r)?
        );
    }
    let grid = RadialGrid::log(5e-3, 60.0, 2350)?;
    for k in 0..=3 {
        println!("residual of L_s e_{k} - {k} e_{k}: {:.3e}", eigen_residual(&p, k, &grid, 1e-2, 30.0)?);
    }
    Ok(())
}
