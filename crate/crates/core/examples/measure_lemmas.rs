//! `lambda`, `g`, its Gateaux derivative and the second-order gap bound on discrete laws.

use smmv::measure::{check_gap_bound, check_lambda_sandwich, g_objective, gateaux, solve_lambda, DiscreteMeasure};

fn main() {
    let theta = 2.0;
    let p = DiscreteMeasure::uniform(&[-1.0, 0.0, 0.5, 2.0], 0.3).unwrap();
    let q = DiscreteMeasure::uniform(&[-0.5, 1.0, 3.0], 0.3).unwrap();
    let lp = solve_lambda(&p, theta).unwrap();
    println!("lambda(p) = {:.12}, residual {:.1e}", lp.lambda, lp.residual);
    println!("g(p) = {:.12}, g(q) = {:.12}", g_objective(&p, theta).unwrap(), g_objective(&q, theta).unwrap());
    let dg = gateaux(&p, &q, theta).unwrap();
    println!("dg(p; q - p) = {dg:.12}");
    for eps in [1e-1, 1e-2, 1e-3] {
        let mix = p.mixture(&q, eps).unwrap();
        let quotient = (g_objective(&mix, theta).unwrap() - g_objective(&p, theta).unwrap()) / eps;
        println!("  eps {eps:.0e}: difference quotient {quotient:.12}");
    }
    let gap = check_gap_bound(&p, &q, theta).unwrap();
    println!("gap {:.6e} <= bound {:.6e}: {}", gap.gap, gap.bound, gap.ok);
    let s = check_lambda_sandwich(&p, &[0.2, -0.1, 0.4, 0.0], theta).unwrap();
    println!("{:.6} <= {:.6} <= {:.6}: {}", s.lower, s.difference, s.upper, s.ok);
}
