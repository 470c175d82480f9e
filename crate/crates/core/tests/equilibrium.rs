mod common;

use common::*;
use proptest::prelude::*;
use smmv::beta::solve_beta_default;
use smmv::equilibrium::{
    active_probability, equilibrium_value, equilibrium_value_expanded, gaussian_terminal, lambda_gaussian,
    mv_strategy, onec_strategy, strategy_value, value_gaussian, ConstantStrategy, EquilibriumStrategy,
    GaussianTerminal, MvStrategy,
};
use smmv::market::{Curve, MarketParams};
use smmv::special::{phi, psi};

/// `E[h(X)]` for `X ~ N(mu, sd^2)` by quadrature over `[-12, 12]` standard deviations,
/// split at the kink of `h` at `kink`.
fn normal_expectation<F: Fn(f64) -> f64>(mu: f64, sd: f64, kink: f64, h: F) -> f64 {
    let u = ((kink - mu) / sd).clamp(-12.0, 12.0);
    let f = |s: f64| h(mu + sd * s) * phi(s);
    simpson(&f, -12.0, u, 1e-15) + simpson(&f, u, 12.0, 1e-15)
}

#[test]
fn lambda_identity_by_quadrature() {
    for &(mu, sd, zeta, theta) in &[(1.0, 0.5, 0.5, 5.0), (0.0, 1.0, 0.0, 1.0), (3.0, 0.05, 0.9, 2.0), (-2.0, 4.0, 0.3, 0.2)] {
        let gt = GaussianTerminal { mu, sd, zeta, theta };
        let l = lambda_gaussian(&gt);
        let kink = l - zeta / theta;
        let e = normal_expectation(mu, sd, kink, |x| (kink - x).max(0.0));
        assert!(((1.0 - zeta) - theta * e).abs() < 1e-10, "{gt:?}");
    }
}

#[test]
fn gaussian_value_is_the_criterion_at_lambda() {
    for &(mu, sd, zeta, theta) in &[(1.0, 0.5, 0.5, 5.0), (0.0, 1.0, 0.0, 1.0), (3.0, 0.05, 0.9, 2.0)] {
        let gt = GaussianTerminal { mu, sd, zeta, theta };
        let l = lambda_gaussian(&gt);
        let kink = l - zeta / theta;
        let sq = normal_expectation(mu, sd, kink, |x| (kink - x).max(0.0).powi(2));
        let oracle = l * (1.0 - zeta) - 0.5 * theta * sq + zeta * mu + (zeta * zeta - 1.0) / (2.0 * theta);
        assert!((value_gaussian(&gt) - oracle).abs() < 1e-10, "{gt:?}");
    }
}

#[test]
fn reference_lambda_and_limits() {
    let gt = GaussianTerminal { mu: 0.0, sd: 1.0, zeta: 0.0, theta: 1.0 };
    assert!((lambda_gaussian(&gt) - 0.8994715612537435).abs() < 1e-14);
    let tiny = GaussianTerminal { mu: 2.0, sd: 1e-8, zeta: 0.3, theta: 5.0 };
    assert!((lambda_gaussian(&tiny) - 2.2).abs() < 1e-6);
    assert!((value_gaussian(&tiny) - 2.0).abs() < 1e-6);
    let point = GaussianTerminal { sd: 0.0, ..tiny };
    assert_eq!(lambda_gaussian(&point), 2.2);
    assert_eq!(value_gaussian(&point), 2.0);
}

#[test]
fn equilibrium_loading_reproduces_the_solver_variance() {
    let params = reference_market(0.5);
    let sol = solve_beta_default(&params).unwrap();
    for t in [0.0, 7.3, 20.0, 24.99] {
        let gt = gaussian_terminal(&params, &EquilibriumStrategy::new(&sol), t, 1.0).unwrap();
        let want = sol.tail_integral_from(t).sqrt() / THETA;
        assert!(rel_err(gt.sd, want) < 1e-10, "t = {t}");
        // Active probability equals 1/beta at the equilibrium.
        assert!(rel_err(active_probability(gt.scaled_budget()), 1.0 / sol.beta_at(t)) < 1e-9);
    }
}

#[test]
fn value_forms_and_endpoints() {
    for zeta in [0.0, 0.5, 0.7] {
        let params = reference_market(zeta);
        let sol = solve_beta_default(&params).unwrap();
        for t in [0.0, 10.0, 24.0] {
            let a = equilibrium_value(&params, &sol, t, 1.5).unwrap();
            let b = equilibrium_value_expanded(&params, &sol, t, 1.5).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "zeta = {zeta}, t = {t}");
        }
        assert_eq!(equilibrium_value(&params, &sol, HORIZON, 1.5).unwrap(), 1.5);
    }
}

#[test]
fn equilibrium_dominates_the_mean_variance_amount() {
    for zeta in [0.0, 0.5] {
        let params = reference_market(zeta);
        let sol = solve_beta_default(&params).unwrap();
        let n = sol.times().len();
        for (i, &t) in sol.times().iter().enumerate() {
            let (p, m) = (onec_strategy(&params, &sol, t).unwrap(), mv_strategy(&params, t).unwrap());
            if i == n - 1 {
                assert_eq!(p, m);
            } else if sol.beta_excess()[i] > 1e-14 {
                assert!(p > m, "t = {t}");
            } else {
                assert!(p >= m);
            }
        }
    }
    let flat = reference_market(0.5).with_vartheta(Curve::constant(0.0)).unwrap();
    let sol = solve_beta_default(&flat).unwrap();
    assert!(sol.times().iter().all(|&t| onec_strategy(&flat, &sol, t).unwrap() == 0.0));
}

#[test]
fn equilibrium_beats_mean_variance_and_constant_amounts() {
    let params = reference_market(0.5);
    let sol = solve_beta_default(&params).unwrap();
    let eq = equilibrium_value(&params, &sol, 0.0, 1.0).unwrap();
    assert!(eq > strategy_value(&params, &MvStrategy, 0.0, 1.0).unwrap());
    for c in [0.0, 0.2, 0.5, 1.0] {
        assert!(eq > strategy_value(&params, &ConstantStrategy(c), 0.0, 1.0).unwrap());
    }
}

#[test]
fn bond_only_terminal_law() {
    let params = MarketParams::new(
        Curve::piecewise_linear(vec![0.0, 25.0], vec![0.0, 0.04]).unwrap(),
        Curve::constant(SIGMA),
        Curve::constant(VARTHETA),
        THETA,
        0.5,
        HORIZON,
    )
    .unwrap();
    let gt = gaussian_terminal(&params, &ConstantStrategy(0.0), 5.0, 2.0).unwrap();
    // r(s) = 0.0016 s, so int_5^25 r = 0.0016 (625 - 25) / 2 = 0.48.
    assert!(rel_err(gt.mu, 2.0 * (0.48f64).exp()) < 1e-14);
    assert_eq!(gt.sd, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn value_is_affine_in_wealth(x in -10.0f64..10.0, dx in -5.0f64..5.0, t in 0.0f64..25.0) {
        let params = reference_market(0.35);
        let sol = solve_beta_default(&params).unwrap();
        let a = equilibrium_value(&params, &sol, t, x).unwrap();
        let b = equilibrium_value(&params, &sol, t, x + dx).unwrap();
        let slope = (R * (HORIZON - t)).exp();
        prop_assert!((b - a - dx * slope).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn lambda_closed_form_brackets(mu in -5.0f64..5.0, sd in 1e-3f64..5.0, zeta in 0.0f64..0.95, theta in 0.1f64..10.0) {
        let gt = GaussianTerminal { mu, sd, zeta, theta };
        let l = lambda_gaussian(&gt);
        prop_assert!(l <= mu + 1.0 / theta + 1e-12);
        prop_assert!((l - zeta / theta - mu - psi(gt.scaled_budget()).unwrap() * sd).abs() < 1e-12 * (1.0 + l.abs()));
        prop_assert!(value_gaussian(&gt) <= mu + 1e-12);
    }
}
