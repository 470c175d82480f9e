//! The normal integral `f(x) = x Phi(x) + phi(x)`, its inverse `psi` and the tail integral of `psi`.

use smmv::special::{f_int_cdf, int_psi, psi, quantile, Phi};

fn main() {
    println!("{:>8} {:>22} {:>22}", "x", "f(x)", "psi(f(x))");
    for x in [-6.0, -2.0, 0.0, 1.0, 3.0] {
        let y = f_int_cdf(x);
        println!("{x:>8} {y:>22.16e} {:>22.16e}", psi(y).unwrap());
    }
    println!("psi(1) = {:.12}", psi(1.0).unwrap());
    println!("Phi(1.96) = {:.12}, quantile(0.975) = {:.12}", Phi(1.96), quantile(0.975).unwrap());
    for b in [1e-6, 1e-2, 0.5, 1.0] {
        println!("int_0^{b} psi = {:.12e}", int_psi(b).unwrap());
    }
}
