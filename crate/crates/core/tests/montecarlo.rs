mod common;

use common::*;
use smmv::beta::solve_beta_default;
use smmv::equilibrium::{gaussian_terminal, ConstantStrategy, EquilibriumStrategy};
use smmv::market::MarketParams;
use smmv::montecarlo::{empirical_value, simulate, Scheme, SeMethod, SimConfig};
use smmv::special::Phi;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn batches_do_not_depend_on_the_thread_count() {
    let params = reference_market(0.5);
    let sol = solve_beta_default(&params).unwrap();
    let strategy = EquilibriumStrategy::new(&sol);
    for cfg in [SimConfig::exact(50_000, 11, 0.0, 1.0), SimConfig::euler(5_000, 100, 11, 3.0, 1.0)] {
        let one = in_pool(1, || simulate(&params, &strategy, &cfg).unwrap());
        let four = in_pool(4, || simulate(&params, &strategy, &cfg).unwrap());
        let again = in_pool(3, || simulate(&params, &strategy, &cfg).unwrap());
        assert_eq!(one.terminal_wealth(), four.terminal_wealth());
        assert_eq!(one.terminal_wealth(), again.terminal_wealth());
        let other = simulate(&params, &strategy, &SimConfig { seed: 12, ..cfg.clone() }).unwrap();
        assert_ne!(one.terminal_wealth(), other.terminal_wealth());
    }
}

#[test]
fn exact_samples_pass_kolmogorov_smirnov() {
    let params = reference_market(0.5);
    let sol = solve_beta_default(&params).unwrap();
    let strategy = EquilibriumStrategy::new(&sol);
    let gt = gaussian_terminal(&params, &strategy, 0.0, 1.0).unwrap();
    let n = 100_000;
    let batch = simulate(&params, &strategy, &SimConfig::exact(n, 5, 0.0, 1.0)).unwrap();
    let mut z: Vec<f64> = batch.terminal_wealth().iter().map(|x| (x - gt.mu) / gt.sd).collect();
    z.sort_by(f64::total_cmp);
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = Phi(v);
            (c - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - c).abs())
        })
        .fold(0.0, f64::max);
    // One-percent critical value of the one-sample statistic.
    assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
}

#[test]
fn exact_sample_moments() {
    let params = reference_market(0.5);
    let sol = solve_beta_default(&params).unwrap();
    let strategy = EquilibriumStrategy::new(&sol);
    let gt = gaussian_terminal(&params, &strategy, 0.0, 1.0).unwrap();
    let n = 1_000_000;
    let batch = simulate(&params, &strategy, &SimConfig::exact(n, 77, 0.0, 1.0)).unwrap();
    let xs = batch.terminal_wealth();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let nf = n as f64;
    assert!((mean - gt.mu).abs() <= 4.0 * gt.sd / nf.sqrt(), "mean {mean} vs {}", gt.mu);
    assert!((sd - gt.sd).abs() <= 4.0 * gt.sd / (2.0 * nf).sqrt(), "sd {sd} vs {}", gt.sd);
}

#[test]
fn euler_scheme_has_weak_order_one() {
    let params = MarketParams::constant(1.0, 0.2, 0.3, 5.0, 0.5, 1.0).unwrap();
    let strategy = ConstantStrategy(0.5);
    let x0 = 100.0;
    let mu = gaussian_terminal(&params, &strategy, 0.0, x0).unwrap().mu;
    let steps = [250, 500, 1000, 2000];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&k| {
            let b = simulate(&params, &strategy, &SimConfig::euler(100_000, k, 3, 0.0, x0)).unwrap();
            let mean = b.terminal_wealth().iter().sum::<f64>() / b.len() as f64;
            (mean - mu).abs()
        })
        .collect();
    let dts: Vec<f64> = steps.iter().map(|&k| 1.0 / k as f64).collect();
    let order = log_log_slope(&dts, &errs);
    assert!(order >= 0.8, "order {order}, errors {errs:?}");
}

#[test]
fn standard_errors_agree_across_methods() {
    let params = reference_market(0.5);
    let sol = solve_beta_default(&params).unwrap();
    let batch = simulate(&params, &EquilibriumStrategy::new(&sol), &SimConfig::exact(100_000, 9, 0.0, 1.0)).unwrap();
    let xs = batch.terminal_wealth();
    let boot = empirical_value(xs, 0.5, THETA, SeMethod::Bootstrap { resamples: 400, seed: 1 }).unwrap();
    let infl = empirical_value(xs, 0.5, THETA, SeMethod::Influence).unwrap();
    assert_eq!(boot.g, infl.g);
    assert_eq!(boot.lambda, infl.lambda);
    assert!(rel_err(boot.se_g, infl.se_g) < 0.2, "{} vs {}", boot.se_g, infl.se_g);
    assert!(rel_err(boot.se_lambda, infl.se_lambda) < 0.2, "{} vs {}", boot.se_lambda, infl.se_lambda);
}

#[test]
fn constant_batch_is_a_point_mass() {
    let v = empirical_value(&[3.0; 500], 0.2, 4.0, SeMethod::default()).unwrap();
    assert!((v.lambda - 3.25).abs() < 1e-14);
    assert!((v.g - 3.0).abs() < 1e-14);
    assert_eq!(v.se_g, 0.0);
    assert_eq!(v.n, 500);
}

#[test]
fn empirical_measure_of_a_batch() {
    let params = reference_market(0.3);
    let cfg = SimConfig { store_paths: true, ..SimConfig::euler(100, 20, 4, 0.0, 1.0) };
    let batch = simulate(&params, &ConstantStrategy(0.4), &cfg).unwrap();
    assert_eq!(batch.scheme(), Scheme::Euler);
    let m = batch.to_measure(0.3).unwrap();
    assert_eq!(m.len(), 100);
    assert!(m.atoms().iter().all(|a| a.z == 0.3));
    let paths = batch.paths().unwrap();
    assert_eq!(paths.len(), 100);
    assert!(paths.iter().all(|p| p.len() == 21 && p[0] == 1.0));
}
