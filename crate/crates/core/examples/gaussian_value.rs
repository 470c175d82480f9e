//! Closed-form value of the equilibrium and of the mean-variance strategy, checked by simulation.

use smmv::beta::solve_beta_default;
use smmv::equilibrium::{equilibrium_value, gaussian_terminal, strategy_value, EquilibriumStrategy, MvStrategy};
use smmv::market::MarketParams;
use smmv::montecarlo::{empirical_value, simulate, SeMethod, SimConfig};

fn main() {
    let params = MarketParams::constant(0.012, 0.158, 0.343, 5.0, 0.5, 25.0).unwrap();
    let sol = solve_beta_default(&params).unwrap();
    let strategy = EquilibriumStrategy::new(&sol);
    let gt = gaussian_terminal(&params, &strategy, 0.0, 1.0).unwrap();
    println!("terminal wealth ~ N({:.10}, {:.10}^2)", gt.mu, gt.sd);
    let closed = equilibrium_value(&params, &sol, 0.0, 1.0).unwrap();
    println!("equilibrium value {closed:.10}");
    println!("mean-variance value {:.10}", strategy_value(&params, &MvStrategy, 0.0, 1.0).unwrap());

    let batch = simulate(&params, &strategy, &SimConfig::exact(200_000, 1, 0.0, 1.0)).unwrap();
    let v = empirical_value(batch.terminal_wealth(), params.zeta(), params.theta(), SeMethod::Influence).unwrap();
    println!("simulated {:.10} +- {:.2e} ({:+.2} SE)", v.g, v.se_g, (v.g - closed) / v.se_g);
}
