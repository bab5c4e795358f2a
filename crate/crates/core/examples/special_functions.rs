//! Gamma, Kummer, Fox-Wright, Bessel and Laguerre evaluations.

use levy_spectral::specfun::*;
use num_complex::Complex64;

fn main() -> levy_spectral::Result<()> {
    let pol = PrecisionPolicy::default();
    println!("Gamma(4.5)            = {:.15e}", gamma_real(4.5)?);
    println!("log Gamma(0.5 + 10i)  = {:.15e}", log_gamma(Complex64::new(0.5, 10.0))?);
    println!("M(1.5, 2.5, -3)       = {:.15e}", kummer_m(1.5, 2.5, -3.0, &pol)?);
    println!("2F1(1, 2; 3; -0.5)    = {:.15e}", gauss_2f1(1.0, 2.0, 3.0, -0.5, &pol)?);
    println!("J_0(2.5)              = {:.15e}", bessel_j(0.0, 2.5));
    println!("I_1(3) e^-3           = {:.15e}", bessel_i_scaled(1.0, 3.0));
    println!("L_3^(0.5)(1.2)        = {:.15e}", laguerre(3, 0.5, 1.2));
    let x = -25.0;
    let fast = fox_wright_1psi1(2.0, 0.75, 1.0, 0.25, x, &pol)?;
    let mp = fox_wright_1psi1_accurate(2.0, 0.75, 1.0, 0.25, x, 1e-12, &pol)?;
    println!("1Psi1 at x = {x}: double precision (cancelled) {fast:.12e}, multiprecision {:.12e}", mp.value);
    Ok(())
}
