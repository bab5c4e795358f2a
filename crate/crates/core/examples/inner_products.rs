//! Gram matrices of the eigenbasis and its adjoint, and the duality pairing.

use levy_spectral::eigenbasis::*;
use levy_spectral::radial_transforms::gaussian;
use levy_spectral::{Params, RadialGrid};

fn print_matrix(name: &str, r: &InnerProductReport) {
    println!("{name}: max off-diagonal {:.2e}, diagonal error {:.2e}", r.max_offdiag, r.max_diag_error);
    for row in &r.gram {
        println!("  {}", row.iter().map(|v| format!("{v:>12.5e}")).collect::<Vec<_>>().join(" "));
    }
}

fn main() -> levy_spectral::Result<()> {
    let p = Params::new(0.5, 3)?;
    print_matrix("dagger Gram", &eigen_gram_dagger(&p, 3)?);
    print_matrix("ddagger Gram", &adjoint_gram_ddagger(&p, 3)?);
    print_matrix("duality", &duality_matrix(&p, 3)?);
    let g = RadialGrid::log(1e-4, 12.0, 3000)?;
    let u = gaussian(&g, 3, 1.0)?;
    let rep = duality_pairing(&u, &u.scaled(3.0), &p)?;
    println!("pairing of Gaussians: route (a) {:.15e}, route (b) {:.15e}", rep.route_a, rep.route_b);
    Ok(())
}
