//! Reproducible simulation of wealth paths under the exact and Euler schemes.

use smmv::beta::solve_beta_default;
use smmv::equilibrium::{gaussian_terminal, EquilibriumStrategy};
use smmv::market::MarketParams;
use smmv::montecarlo::{empirical_value, simulate, SeMethod, SimConfig};

fn summary(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn main() {
    let params = MarketParams::constant(0.012, 0.158, 0.343, 5.0, 0.5, 25.0).unwrap();
    let sol = solve_beta_default(&params).unwrap();
    let strategy = EquilibriumStrategy::new(&sol);
    let gt = gaussian_terminal(&params, &strategy, 0.0, 1.0).unwrap();
    println!("exact law: mean {:.6}, sd {:.6}", gt.mu, gt.sd);
    for cfg in [SimConfig::exact(100_000, 42, 0.0, 1.0), SimConfig::euler(20_000, 500, 42, 0.0, 1.0)] {
        let batch = simulate(&params, &strategy, &cfg).unwrap();
        let (mean, sd) = summary(batch.terminal_wealth());
        let v = empirical_value(batch.terminal_wealth(), 0.5, 5.0, SeMethod::Bootstrap { resamples: 100, seed: 7 }).unwrap();
        println!(
            "{:?}: {} paths, mean {mean:.6}, sd {sd:.6}, value {:.6} +- {:.1e}",
            batch.scheme(),
            batch.len(),
            v.g,
            v.se_g
        );
    }
}
