use mmcache_core::model::{ContentLibrary, DerivedConstants, NetworkConfig};
use mmcache_core::oracle::{exhaustive_grid_maximize, grid_refine_maximize};
use mmcache_core::placement::*;
use proptest::prelude::*;

fn geometry(d_ic: Vec<f64>) -> PlacementGeometry {
    PlacementGeometry { d_hat: d_ic.clone(), d_ic }
}

fn config(lambda_u: f64, rho: f64) -> NetworkConfig {
    NetworkConfig {
        lambda_u,
        rho,
        ..NetworkConfig::reference()
    }
}

fn instance() -> impl Strategy<Value = (usize, usize, f64, Vec<f64>, f64, f64)> {
    (1usize..=6, 1usize..=3, 0.0..2.0f64, 100e-6..1500e-6f64, 0.0..0.9f64).prop_flat_map(|(n, m, eps, lu, rho)| {
        (
            Just(n),
            Just(m.min(n)),
            Just(eps),
            proptest::collection::vec(0.0..75.0f64, n),
            Just(lu),
            Just(rho),
        )
    })
}

/// Marginal ASLP gain β_i c_i e^{-c_i q_i}.
fn marginal(beta: f64, d: f64, q: f64, c: &NetworkConfig) -> f64 {
    let k = std::f64::consts::PI * c.lambda_u * (1.0 - c.rho) * d * d;
    beta * k * (-k * q).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn optimum_matches_oracle((n, m_d, eps, d_ic, lu, rho) in instance()) {
        let c = config(lu, rho);
        let lib = ContentLibrary::with_uniform_rate(n, eps, 1e9, m_d, 0).unwrap();
        let g = geometry(d_ic.clone());
        let policy = optimize_caching(&g, &lib, &c, DEFAULT_TOLERANCE).unwrap();
        let q = policy.q();
        prop_assert!(q.iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!(policy.occupancy() <= m_d as f64 + 1e-9);
        let objective = |x: &[f64]| aslp(x, &g, &lib, &c).unwrap();
        let reference = grid_refine_maximize(n, m_d as f64, 0.01, objective);
        let (ours, theirs) = (objective(q), objective(&reference));
        prop_assert!((ours - theirs).abs() <= 1e-6, "{ours} vs oracle {theirs}");
        prop_assert!(ours >= theirs - 1e-9);

        // Equal marginal gain on interior coordinates.
        let interior: Vec<f64> = (0..n)
            .filter(|&i| q[i] > 1e-9 && q[i] < 1.0 - 1e-9)
            .map(|i| marginal(lib.popularity()[i], d_ic[i], q[i], &c))
            .collect();
        if let (Some(lo), Some(hi)) = (
            interior.iter().cloned().reduce(f64::min),
            interior.iter().cloned().reduce(f64::max),
        ) {
            prop_assert!(hi - lo <= 1e-6 * hi.max(1e-300), "marginals {interior:?}");
        }
    }

    #[test]
    fn baseline_matches_oracle((n, m_d, eps, _d, lu, rho) in instance()) {
        let c = config(lu, rho);
        let lib = ContentLibrary::with_uniform_rate(n, eps, 1e9, m_d, 0).unwrap();
        let policy = baseline_hitmax_caching(&lib, &c).unwrap();
        prop_assert_eq!(policy.kind, PolicyKind::HitMaxBaseline);
        let objective = |x: &[f64]| hit_probability(x, &lib, &c).unwrap();
        let reference = grid_refine_maximize(n, m_d as f64, 0.01, objective);
        let (ours, theirs) = (objective(policy.q()), objective(&reference));
        prop_assert!((ours - theirs).abs() <= 1e-6, "{ours} vs oracle {theirs}");
    }

    #[test]
    fn popular_files_cached_more_under_equal_geometry(n in 2usize..=8, m_d in 1usize..=3, eps in 0.0..2.0f64, d in 1.0..75.0f64) {
        let c = NetworkConfig::reference();
        let lib = ContentLibrary::with_uniform_rate(n, eps, 1e9, m_d.min(n), 0).unwrap();
        let policy = optimize_caching(&geometry(vec![d; n]), &lib, &c, DEFAULT_TOLERANCE).unwrap();
        let q = policy.q();
        prop_assert!(q.windows(2).all(|w| w[0] >= w[1] - 1e-12), "{q:?}");
    }

    #[test]
    fn sum_of_q_of_mu_is_nonincreasing(d_ic in proptest::collection::vec(1.0..75.0f64, 5), eps in 0.0..2.0f64) {
        let c = NetworkConfig::reference();
        let lib = ContentLibrary::with_uniform_rate(5, eps, 1e9, 2, 0).unwrap();
        let g = geometry(d_ic);
        let mut prev = f64::INFINITY;
        for k in -60..10 {
            let mu = 10f64.powf(k as f64 / 5.0);
            let s: f64 = q_of_mu(mu, &g, &lib, &c).unwrap().iter().sum();
            prop_assert!(s <= prev + 1e-12);
            prev = s;
        }
    }
}

#[test]
fn exhaustive_grid_agrees_on_small_instances() {
    let c = NetworkConfig::reference();
    let lib = ContentLibrary::with_uniform_rate(3, 1.2, 1e9, 1, 0).unwrap();
    let g = geometry(vec![40.0, 60.0, 20.0]);
    let policy = optimize_caching(&g, &lib, &c, DEFAULT_TOLERANCE).unwrap();
    let objective = |x: &[f64]| aslp(x, &g, &lib, &c).unwrap();
    let (_, grid) = exhaustive_grid_maximize(3, 1.0, 0.01, objective);
    let ours = objective(policy.q());
    assert!(ours >= grid - 1e-12);
    // The 0.01 grid is within first-order distance of the optimum.
    assert!(ours - grid < 1e-3);
}

#[test]
fn five_file_reference_instance() {
    let c = NetworkConfig::reference();
    let lib = ContentLibrary::with_uniform_rate(5, 1.2, 1e9, 2, 0).unwrap();
    let g = geometry(vec![70.0, 55.0, 40.0, 62.0, 30.0]);
    let policy = optimize_caching(&g, &lib, &c, DEFAULT_TOLERANCE).unwrap();
    assert!((policy.occupancy() - 2.0).abs() < 1e-10);
    assert!(policy.iterations <= 200);
    let objective = |x: &[f64]| aslp(x, &g, &lib, &c).unwrap();
    let reference = grid_refine_maximize(5, 2.0, 0.01, objective);
    assert!((objective(policy.q()) - objective(&reference)).abs() < 1e-6);
}

#[test]
fn reference_network_bisection_budget() {
    let c = NetworkConfig::reference();
    let lib = ContentLibrary::reference();
    let k = DerivedConstants::new(&c, &lib).unwrap();
    let g = placement_distances(&k, &c, &lib).unwrap();
    let policy = optimize_caching(&g, &lib, &c, 1e-10).unwrap();
    assert!(policy.iterations <= 200, "{}", policy.iterations);
    assert!((policy.occupancy() - lib.m_d as f64).abs() <= 1e-10);
}
