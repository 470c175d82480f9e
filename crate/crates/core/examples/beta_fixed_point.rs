//! Solves the `beta` fixed point on the reference market and prints a few nodes.

use smmv::beta::{solve_beta_default, strong_equilibrium_margin};
use smmv::market::MarketParams;

fn main() {
    let params = MarketParams::constant(0.012, 0.158, 0.343, 5.0, 0.5, 25.0).unwrap();
    let sol = solve_beta_default(&params).unwrap();
    println!(
        "{} iterations, max residual {:.2e}, {} degenerate nodes",
        sol.iterations(),
        sol.max_residual(),
        sol.degenerate_nodes()
    );
    println!("{:>6} {:>20} {:>20} {:>20}", "t", "beta", "beta - 1", "beta'");
    for t in [0.0, 5.0, 10.0, 15.0, 20.0, 24.0, 25.0] {
        println!("{t:>6} {:>20.14} {:>20.6e} {:>20.6e}", sol.beta_at(t), sol.beta_at(t) - 1.0, sol.beta_prime(t));
    }
    let margin = strong_equilibrium_margin(&sol, &params);
    println!("strong equilibrium margin: min {:.3e}, positive throughout: {}", margin.min(), margin.verdict());
}
