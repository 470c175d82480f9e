use proptest::prelude::*;
use smmv::measure::{
    check_gap_bound, check_lambda_sandwich, g_objective, gap_and_lambda_shift, gateaux, grad_g, solve_lambda,
    Atom, DiscreteMeasure,
};

/// Root of `lambda -> E[z + theta (lambda - x - z/theta)_+] - 1` by bisection.
fn lambda_by_bisection(p: &DiscreteMeasure, theta: f64) -> f64 {
    let h = |l: f64| p.atoms().iter().map(|a| a.w * (a.z + theta * (l - a.x - a.z / theta).max(0.0))).sum::<f64>() - 1.0;
    let mut lo = p.atoms().iter().map(|a| a.x + a.z / theta).fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = p.mean_x() + 1.0 / theta + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The SMMV value as a maximum over `lambda` of the concave criterion
/// `lambda (1 - E z) - theta/2 E[(lambda - x - z/theta)_+^2] + E[x z] + (E z^2 - 1)/(2 theta)`.
fn g_by_maximisation(p: &DiscreteMeasure, theta: f64) -> f64 {
    let crit = |l: f64| {
        p.atoms()
            .iter()
            .map(|a| {
                let d = (l - a.x - a.z / theta).max(0.0);
                a.w * (l * (1.0 - a.z) - 0.5 * theta * d * d + a.x * a.z + (a.z * a.z - 1.0) / (2.0 * theta))
            })
            .sum::<f64>()
    };
    let (mut a, mut b) = (
        p.atoms().iter().map(|a| a.x + a.z / theta).fold(f64::INFINITY, f64::min) - 1.0,
        p.mean_x() + 1.0 / theta + 1.0,
    );
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..300 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if crit(c) > crit(d) {
            b = d;
        } else {
            a = c;
        }
    }
    crit(0.5 * (a + b))
}

fn measure_strategy(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-5.0f64..5.0, 0.0f64..0.95, 0.01f64..1.0), 1..=max_atoms)
        .prop_map(|v| DiscreteMeasure::normalized(v.into_iter().map(|(x, z, w)| Atom::new(x, z, w)).collect()).unwrap())
}

fn theta_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(5.0), 0.1f64..20.0]
}

#[test]
fn lambda_reference_values() {
    let two = DiscreteMeasure::new(vec![Atom::new(0.0, 0.0, 0.5), Atom::new(1.0, 0.0, 0.5)]).unwrap();
    assert!((solve_lambda(&two, 1.0).unwrap().lambda - 1.5).abs() < 1e-15);
    let half = DiscreteMeasure::point_mass(0.0, 0.5).unwrap();
    assert!((solve_lambda(&half, 1.0).unwrap().lambda - 1.0).abs() < 1e-15);
    let zero = DiscreteMeasure::point_mass(0.0, 0.0).unwrap();
    assert!((solve_lambda(&zero, 5.0).unwrap().lambda - 0.2).abs() < 1e-15);
}

#[test]
fn symmetric_two_point_law() {
    // b = -1, 1 with equal mass: 1 = (lambda + 1)/2 on [-1, 1] gives lambda = 1, and
    // g = 1 - 1/2 (1/2 * 4) - 1/2 = -1/2.
    let p = DiscreteMeasure::new(vec![Atom::new(-1.0, 0.0, 0.5), Atom::new(1.0, 0.0, 0.5)]).unwrap();
    assert!((solve_lambda(&p, 1.0).unwrap().lambda - 1.0).abs() < 1e-15);
    assert!((g_objective(&p, 1.0).unwrap() + 0.5).abs() < 1e-15);
    assert!((g_by_maximisation(&p, 1.0) + 0.5).abs() < 1e-12);
}

#[test]
fn half_theta_constant_is_attained() {
    // p = delta_0 and q = delta_{1/theta}: the remainder equals theta/2 |d lambda|^2 exactly,
    // so the constant 1/2 fails for every theta > 1.
    for theta in [0.5, 1.0, 2.0, 5.0, 20.0] {
        let p = DiscreteMeasure::point_mass(0.0, 0.0).unwrap();
        let q = DiscreteMeasure::point_mass(1.0 / theta, 0.0).unwrap();
        let (gap, dl) = gap_and_lambda_shift(&p, &q, theta).unwrap();
        assert!((dl - 1.0 / theta).abs() < 1e-15);
        assert!((gap - 0.5 / theta).abs() < 1e-15);
        assert!((gap - 0.5 * theta * dl * dl).abs() < 1e-14);
        let c = check_gap_bound(&p, &q, theta).unwrap();
        assert!(c.ok);
        assert_eq!(gap > 0.5 * dl * dl + 1e-12, theta > 1.0);
    }
}

#[test]
fn gateaux_error_is_first_order_over_three_decades() {
    let p = DiscreteMeasure::new(vec![
        Atom::new(-1.0, 0.2, 0.3),
        Atom::new(0.5, 0.0, 0.4),
        Atom::new(2.0, 0.5, 0.3),
    ])
    .unwrap();
    let q = DiscreteMeasure::new(vec![Atom::new(0.0, 0.1, 0.5), Atom::new(3.0, 0.3, 0.5)]).unwrap();
    let theta = 2.0;
    let g0 = g_objective(&p, theta).unwrap();
    let dg = gateaux(&p, &q, theta).unwrap();
    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let errs: Vec<f64> =
        eps.iter().map(|&e| ((g_objective(&p.mixture(&q, e).unwrap(), theta).unwrap() - g0) / e - dg).abs()).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log10();
        assert!((order - 1.0).abs() < 0.05, "{errs:?}");
    }
}

#[test]
fn csv_ingestion_defaults() {
    let text = "# sample\nx\n1.0\n3.0\n";
    let m = DiscreteMeasure::from_csv_reader(text.as_bytes(), 0.25).unwrap();
    assert_eq!(m.len(), 2);
    assert!(m.atoms().iter().all(|a| a.z == 0.25 && a.w == 0.5));
    let text = "x,z,w\n1.0,0.1,0.25\n3.0,0.2,0.75\n";
    let m = DiscreteMeasure::from_csv_reader(text.as_bytes(), 0.0).unwrap();
    assert_eq!(m.atoms()[1].z, 0.2);
    assert_eq!(m.atoms()[1].w, 0.75);
    let unnormalised = "x,w\n1.0,1\n3.0,3\n";
    assert!(DiscreteMeasure::from_csv_reader(unnormalised.as_bytes(), 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn lambda_matches_bisection_and_is_exact(p in measure_strategy(40), theta in theta_strategy()) {
        let lr = solve_lambda(&p, theta).unwrap();
        let scale = 1.0 + lr.lambda.abs();
        prop_assert!((lr.lambda - lambda_by_bisection(&p, theta)).abs() <= 1e-12 * scale);
        prop_assert!(lr.residual <= 1e-14 * (1.0 + theta * scale));
        let lo = p.atoms().iter().map(|a| a.x + a.z / theta).fold(f64::INFINITY, f64::min);
        prop_assert!(lr.lambda > lo);
        prop_assert!(lr.lambda <= p.mean_x() + 1.0 / theta + 1e-13 * scale);
    }

    #[test]
    fn g_is_the_maximum_of_the_criterion(p in measure_strategy(40), theta in theta_strategy()) {
        let g = g_objective(&p, theta).unwrap();
        let oracle = g_by_maximisation(&p, theta);
        prop_assert!((g - oracle).abs() <= 1e-10 * (1.0 + g.abs()), "{} vs {}", g, oracle);
    }

    #[test]
    fn gradient_integrates_to_g(p in measure_strategy(40), theta in theta_strategy()) {
        let total: f64 = p.atoms().iter().map(|a| a.w * grad_g(&p, theta, a.x, a.z).unwrap()).sum();
        let g = g_objective(&p, theta).unwrap();
        prop_assert!((total - g).abs() <= 1e-13 * (1.0 + g.abs()));
    }

    #[test]
    fn gateaux_of_p_towards_itself_vanishes(p in measure_strategy(30), theta in theta_strategy()) {
        prop_assert!(gateaux(&p, &p, theta).unwrap().abs() <= 1e-13);
    }

    #[test]
    fn gap_bound_with_half_theta(p in measure_strategy(50), q in measure_strategy(50), theta in theta_strategy()) {
        let c = check_gap_bound(&p, &q, theta).unwrap();
        prop_assert!(c.ok, "gap {} bound {}", c.gap, c.bound);
    }

    #[test]
    fn gap_bound_for_translates(p in measure_strategy(30), c in -3.0f64..3.0, theta in theta_strategy()) {
        let q = p.shifted(c);
        let check = check_gap_bound(&p, &q, theta).unwrap();
        prop_assert!(check.ok);
    }

    #[test]
    fn lambda_sandwich(p in measure_strategy(50), seed in prop::collection::vec(-2.0f64..2.0, 50), theta in theta_strategy()) {
        let chi = &seed[..p.len()];
        let s = check_lambda_sandwich(&p, chi, theta).unwrap();
        prop_assert!(s.ok, "{:?}", s);
    }

    #[test]
    fn constant_perturbation_shifts_lambda(p in measure_strategy(30), c in -3.0f64..3.0, theta in theta_strategy()) {
        let s = check_lambda_sandwich(&p, &vec![c; p.len()], theta).unwrap();
        prop_assert!((s.lower - c).abs() < 1e-12 && (s.upper - c).abs() < 1e-12);
        prop_assert!((s.difference - c).abs() < 1e-12 * (1.0 + c.abs() + p.mean_x().abs()) * 10.0);
    }

    #[test]
    fn translation_equivariance(p in measure_strategy(30), c in -10.0f64..10.0, theta in theta_strategy()) {
        let q = p.shifted(c);
        let (l0, l1) = (solve_lambda(&p, theta).unwrap().lambda, solve_lambda(&q, theta).unwrap().lambda);
        let (g0, g1) = (g_objective(&p, theta).unwrap(), g_objective(&q, theta).unwrap());
        let scale = 1.0 + l0.abs() + c.abs();
        prop_assert!((l1 - l0 - c).abs() <= 1e-13 * scale);
        prop_assert!((g1 - g0 - c).abs() <= 1e-12 * (scale + g0.abs()));
    }

    #[test]
    fn point_mass_value_is_the_wealth(x in -100.0f64..100.0, z in 0.0f64..0.99, theta in theta_strategy()) {
        let p = DiscreteMeasure::point_mass(x, z).unwrap();
        prop_assert!((g_objective(&p, theta).unwrap() - x).abs() <= 1e-13 * (1.0 + x.abs()));
        prop_assert!((solve_lambda(&p, theta).unwrap().lambda - x - 1.0 / theta).abs() <= 1e-13 * (1.0 + x.abs()));
    }

    #[test]
    fn monotone_under_dominance(
        x0 in -5.0f64..5.0, x1 in -5.0f64..5.0, bump in 0.0f64..3.0, w in 0.05f64..0.95,
        theta in theta_strategy(), which in 0usize..2,
    ) {
        let base = DiscreteMeasure::new(vec![Atom::new(x0, 0.0, w), Atom::new(x1, 0.0, 1.0 - w)]).unwrap();
        let mut chi = vec![0.0, 0.0];
        chi[which] = bump;
        let raised = base.perturbed(&chi).unwrap();
        let (g0, g1) = (g_objective(&base, theta).unwrap(), g_objective(&raised, theta).unwrap());
        prop_assert!(g1 >= g0 - 1e-13 * (1.0 + g0.abs()));
    }
}
