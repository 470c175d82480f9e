//! Value lost by open-loop and closed-loop spike deviations as the spike length shrinks.

use smmv::beta::solve_beta;
use smmv::beta::SolverConfig;
use smmv::equilibrium::onec_strategy;
use smmv::market::{MarketParams, TimeGrid};
use smmv::spike::{default_epsilons, fit_leading_order, run_experiment, theory_leading_order, SpikeMode};

fn main() {
    for r in [0.012, 0.0] {
        let params = MarketParams::constant(r, 0.158, 0.343, 5.0, 0.5, 25.0).unwrap();
        let grid = TimeGrid::uniform(25.0, 2500).unwrap();
        let sol = solve_beta(&params, &grid, &SolverConfig::default().with_tol(1e-13)).unwrap();
        let t = 10.0;
        let pi = onec_strategy(&params, &sol, t).unwrap();
        println!("r = {r}, t = {t}, equilibrium amount {pi:.8}");
        for (mode, xi) in [(SpikeMode::OpenLoop, 0.2), (SpikeMode::ClosedLoop, pi + 0.2), (SpikeMode::ClosedLoop, pi)] {
            let theory = theory_leading_order(&params, &sol, t, xi, mode).unwrap().unwrap();
            let exp = run_experiment(&params, &sol, t, 1.0, xi, &default_epsilons(), mode).unwrap();
            let fit = fit_leading_order(&exp, theory.order).unwrap();
            println!(
                "  {:<11} xi {xi:.4}: order {:.4}, coefficient {:+.6e} (theory {:+.6e}), smallest gap {:+.3e}",
                mode.as_str(),
                fit.empirical_order,
                fit.coefficient,
                theory.coefficient,
                exp.gaps.last().unwrap()
            );
        }
    }
}
