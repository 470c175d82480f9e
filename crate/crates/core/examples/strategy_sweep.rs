//! Equilibrium dollar amounts against the mean-variance amount for several floors `zeta`.

use smmv::beta::solve_beta_default;
use smmv::equilibrium::{mv_strategy, onec_strategy};
use smmv::market::MarketParams;

fn main() {
    let base = MarketParams::constant(0.012, 0.158, 0.343, 5.0, 0.0, 25.0).unwrap();
    let zetas = [0.0, 0.35, 0.7];
    let sols: Vec<_> = zetas.iter().map(|&z| solve_beta_default(&base.with_zeta(z).unwrap()).unwrap()).collect();
    print!("{:>6} {:>12}", "t", "mv");
    for z in zetas {
        print!(" {:>12}", format!("zeta={z}"));
    }
    println!();
    for t in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0] {
        print!("{t:>6} {:>12.8}", mv_strategy(&base, t).unwrap());
        for (z, sol) in zetas.iter().zip(&sols) {
            print!(" {:>12.8}", onec_strategy(&base.with_zeta(*z).unwrap(), sol, t).unwrap());
        }
        println!();
    }
}
