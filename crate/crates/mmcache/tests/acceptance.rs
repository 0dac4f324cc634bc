//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mmcache::experiment::{run_experiment, PointResult};
use mmcache::{build_pool, parse_spec, workers_from_env};
use mmcache_core::analytic::{AnalyticOptions, AnalyticReport};
use mmcache_core::model::{worst_case_avg_interference, ContentLibrary, NetworkConfig};
use mmcache_core::oracle::{grid_refine_maximize, ks_p_value, ks_statistic};
use mmcache_core::placement::{aslp, optimize_caching, PlacementGeometry, DEFAULT_TOLERANCE};
use mmcache_core::sim::{
    assign_caches, campbell_monte_carlo, generate_topology, MetricsReport, Simulator,
};
use mmcache_core::system::{SystemDesign, SystemKind};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Check = Result<String, String>;

const LAMBDAS: [f64; 7] = [200e-6, 400e-6, 600e-6, 800e-6, 1000e-6, 1200e-6, 1400e-6];
const SWEEP_TRIALS: u64 = 4000;

struct Suite {
    failed: usize,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let mut result = f();
        let elapsed = start.elapsed();
        if let (Ok(detail), Some(limit)) = (&result, limit) {
            if elapsed > limit {
                result = Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}"));
            }
        }
        match result {
            Ok(detail) => println!("PASS  C{id} {name}: {detail} [{elapsed:.1?}]"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL  C{id} {name}: {detail} [{elapsed:.1?}]");
            }
        }
    }
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn optimizer_matches_oracle() -> Check {
    let strategy = (1usize..=6, 1usize..=3, 0.0..2.0f64, 100e-6..1500e-6f64, 0.0..0.9f64).prop_flat_map(
        |(n, m, eps, lu, rho)| {
            (
                Just(n),
                Just(m.min(n)),
                Just(eps),
                proptest::collection::vec(0.0..75.0f64, n),
                Just(lu),
                Just(rho),
            )
        },
    );
    let mut runner = TestRunner::new(Config {
        cases: 50,
        failure_persistence: None,
        ..Config::default()
    });
    let worst = std::cell::Cell::new((0.0f64, 0.0f64));
    runner
        .run(&strategy, |(n, m_d, eps, d_ic, lambda_u, rho)| {
            let c = NetworkConfig {
                lambda_u,
                rho,
                ..NetworkConfig::reference()
            };
            let lib = ContentLibrary::with_uniform_rate(n, eps, 1e9, m_d, 0).unwrap();
            let g = PlacementGeometry {
                d_hat: d_ic.clone(),
                d_ic: d_ic.clone(),
            };
            let q = optimize_caching(&g, &lib, &c, DEFAULT_TOLERANCE).unwrap().q().to_vec();
            let objective = |x: &[f64]| aslp(x, &g, &lib, &c).unwrap();
            let reference = grid_refine_maximize(n, m_d as f64, 0.01, objective);
            let gap = (objective(&q) - objective(&reference)).abs();
            prop_assert!(gap <= 1e-6, "ASLP {} vs oracle {}", objective(&q), objective(&reference));
            let marginals: Vec<f64> = (0..n)
                .filter(|&i| q[i] > 1e-9 && q[i] < 1.0 - 1e-9)
                .map(|i| {
                    let k = PI * c.lambda_u * (1.0 - c.rho) * d_ic[i] * d_ic[i];
                    lib.popularity()[i] * k * (-k * q[i]).exp()
                })
                .collect();
            let spread = match (
                marginals.iter().cloned().reduce(f64::min),
                marginals.iter().cloned().reduce(f64::max),
            ) {
                (Some(lo), Some(hi)) => (hi - lo) / hi.max(1e-300),
                _ => 0.0,
            };
            prop_assert!(spread <= 1e-6, "interior marginals {marginals:?}");
            let (g0, s0) = worst.get();
            worst.set((g0.max(gap), s0.max(spread)));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let (gap, spread) = worst.get();
    Ok(format!("50 instances, max |ΔASLP| = {gap:.1e}, max relative KKT spread = {spread:.1e}"))
}

fn campbell() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for d_l in [50.0, 75.0] {
        let c = NetworkConfig {
            d_l,
            ..NetworkConfig::reference()
        };
        let exact = worst_case_avg_interference(&c).map_err(|e| e.to_string())?;
        let mc = campbell_monte_carlo(&c, 100_000, 1_000_000, 17).map_err(|e| e.to_string())?;
        let rel = (mc.mean - exact).abs() / exact;
        ok &= rel <= 0.01 && mc.realizations >= 100_000;
        parts.push(format!(
            "D_L = {d_l}: closed form {exact:.5e}, MC {:.5e} ({} realizations), rel. error {:.2}%",
            mc.mean,
            mc.realizations,
            100.0 * rel
        ));
    }
    ensure(ok, parts.join("; "))
}

fn analytic_vs_simulation(pool: &rayon::ThreadPool, reports: &mut Vec<MetricsReport>) -> Check {
    let c = NetworkConfig::reference();
    let l = ContentLibrary::reference();
    let mut parts = Vec::new();
    let mut ok = true;
    for kind in SystemKind::ALL {
        let design = SystemDesign::new(kind, &c, &l).map_err(|e| e.to_string())?;
        let a = design.analytic(&c, &l, &AnalyticOptions::default()).map_err(|e| e.to_string())?;
        let sim = Simulator::from_design(&design, &c, &l).map_err(|e| e.to_string())?;
        let r = pool
            .install(|| mmcache::experiment::run_campaign_parallel(&sim, 20_000, 2024))
            .map_err(|e| e.to_string())?;
        reports.push(r);
        let diffs = [
            ("SP", r.sp.value, a.sp_total),
            ("p_s", r.self_hit.value, a.p_s),
            ("D2D", r.d2d_fraction.value, a.p_d),
        ];
        ok &= diffs.iter().all(|(_, s, a)| (s - a).abs() <= 0.02);
        parts.push(format!(
            "{kind} {}",
            diffs
                .iter()
                .map(|(n, s, a)| format!("{n} {s:.4}/{a:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    ensure(ok, format!("simulated/analytic at 2e4 trials: {}", parts.join("; ")))
}

/// Rows of a λ_u sweep at fixed (D_L, R), ε = 1.2, indexed [λ][system].
struct Sweep {
    d_l: f64,
    rate: f64,
    rows: Vec<[PointResult; 2]>,
}

fn run_sweep(pool: &rayon::ThreadPool, d_l: f64, rate: f64) -> Result<Sweep, String> {
    let values = LAMBDAS.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
    let text = format!(
        "lambda_u = 5e-4\nd_l = {d_l}\nrate = {rate}\nepsilon = 1.2\ntrials = {SWEEP_TRIALS}\nbase_seed = 99\n\
         systems = [\"S-1\", \"S-2\"]\n[[sweep]]\nparam = \"lambda_u\"\nvalues = [{values}]\n"
    );
    let spec = parse_spec(&text).map_err(|e| e.to_string())?;
    let summary = run_experiment(&spec, pool, std::io::sink()).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for pair in summary.rows.chunks(2) {
        let get = |i: usize| pair[i].outcome.clone().map_err(|e| format!("D_L = {d_l}, R = {rate}: {e}"));
        rows.push([get(0)?, get(1)?]);
    }
    Ok(Sweep { d_l, rate, rows })
}

fn label(s: &Sweep) -> String {
    format!("(D_L = {}, R = {} Gbps)", s.d_l, s.rate / 1e9)
}

fn fig1_ordering(sweeps: &[&Sweep]) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for s in sweeps {
        let mut min_gap = f64::INFINITY;
        for [a, b] in &s.rows {
            let (s1, s2) = (a.simulated.sp, b.simulated.sp);
            ok &= s1.value >= s2.value - s2.half_width;
            min_gap = min_gap.min(s1.value - s2.value);
        }
        let sp1: Vec<String> = s.rows.iter().map(|[a, _]| format!("{:.3}", a.simulated.sp.value)).collect();
        parts.push(format!("{} min SP(S-1) − SP(S-2) = {min_gap:.3}, SP(S-1) = [{}]", label(s), sp1.join(" ")));
        if s.d_l == 50.0 {
            let monotone = s.rows.windows(2).all(|w| {
                let (x, y) = (w[0][0].simulated.sp, w[1][0].simulated.sp);
                y.value >= x.value - (x.half_width + y.half_width)
            });
            ok &= monotone;
            if !monotone {
                parts.push("SP(S-1) decreases in λ_u beyond CI at D_L = 50".into());
            }
        }
    }
    ensure(ok, parts.join("; "))
}

fn fig2_offloading(sweeps: &[&Sweep]) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for s in sweeps {
        let (mut op_margin, mut sop_margin) = (f64::INFINITY, f64::INFINITY);
        for [a, b] in &s.rows {
            let (s1, s2) = (&a.simulated, &b.simulated);
            op_margin = op_margin.min(s2.op_d.lower() - s1.op_d.upper());
            sop_margin = sop_margin.min(s1.sop_d.lower() - s2.sop_d.upper());
        }
        ok &= op_margin > 0.0 && sop_margin > 0.0;
        parts.push(format!(
            "{} min CI separation: OP_d {op_margin:.3}, SOP_d {sop_margin:.3}",
            label(s)
        ));
    }
    ensure(ok, parts.join("; "))
}

fn energy_efficiency(cases: &[(&Sweep, f64)]) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (s, bound) in cases {
        let ratios: Vec<f64> = s
            .rows
            .iter()
            .filter_map(|[a, b]| Some(a.simulated.ee_d2d? / b.simulated.ee_d2d?))
            .collect();
        if ratios.len() != s.rows.len() {
            return Err(format!("{}: ee_d2d absent at some point", label(s)));
        }
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        ok &= mean >= *bound;
        parts.push(format!("{} mean ee_d2d ratio {mean:.3} (bound {bound})", label(s)));
    }
    ensure(ok, parts.join("; "))
}

fn statistical_sanity(reports: &[MetricsReport]) -> Check {
    let c = NetworkConfig::reference();
    let mut parts = Vec::new();

    // Nearest caching MU of one file, 1e4 independent draws.
    let q = 0.3;
    let samples: Vec<f64> = (0..10_000u64)
        .map(|s| {
            let t = generate_topology(&c, s).unwrap();
            let caches = assign_caches(&t, &[q], s ^ 0xABCD).unwrap();
            t.users
                .iter()
                .enumerate()
                .filter(|(i, u)| !u.active && caches.contains(*i, 0))
                .map(|(_, u)| u.position.norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let k = PI * c.lambda_u * (1.0 - c.rho) * q;
    let d = ks_statistic(&samples, |r| 1.0 - (-k * r * r).exp());
    let p = ks_p_value(d, samples.len());
    if p <= 0.01 {
        return Err(format!("nearest-cacher KS p = {p:.3}"));
    }
    parts.push(format!("KS p = {p:.3}"));

    // Poisson counts and Bernoulli activity / caching.
    let qs = [0.9, 0.5, 0.1, 0.01];
    let (mut users, mut rrhs, mut n, mut active) = (0.0, 0.0, 0u64, 0u64);
    let mut hits = [0u64; 4];
    let mut window = 0.0;
    let seeds = 400;
    for s in 0..seeds {
        let t = generate_topology(&c, s).unwrap();
        let caches = assign_caches(&t, &qs, s + 1000).unwrap();
        users += (t.users.len() - 1) as f64;
        rrhs += t.rrhs.len() as f64;
        window = t.user_window;
        for (i, u) in t.users.iter().enumerate().skip(1) {
            n += 1;
            active += u64::from(u.active);
            for (f, h) in hits.iter_mut().enumerate() {
                *h += u64::from(caches.contains(i, f));
            }
        }
    }
    let mut worst_z: f64 = 0.0;
    for (total, mean) in [
        (users, c.lambda_u * PI * window * window),
        (rrhs, c.lambda_r * PI * c.sim_radius * c.sim_radius),
    ] {
        let expected = mean * seeds as f64;
        worst_z = worst_z.max(((total - expected) / expected.sqrt()).abs());
    }
    if worst_z >= 4.0 {
        return Err(format!("Poisson count z = {worst_z:.2}"));
    }
    parts.push(format!("Poisson |z| ≤ {worst_z:.2}"));
    let mut worst_sigma: f64 = 0.0;
    for (count, p) in std::iter::once((active, c.rho)).chain(hits.iter().copied().zip(qs)) {
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        worst_sigma = worst_sigma.max((count as f64 - n as f64 * p).abs() / sd);
    }
    if worst_sigma > 3.0 {
        return Err(format!("Bernoulli frequency off by {worst_sigma:.2}σ"));
    }
    parts.push(format!("Bernoulli ≤ {worst_sigma:.2}σ"));

    if let Some(r) = reports.iter().find(|r| r.sop_d.value > r.op_d.value) {
        return Err(format!("SOP_d {} > OP_d {}", r.sop_d.value, r.op_d.value));
    }
    parts.push(format!("SOP_d ≤ OP_d in {} reports", reports.len()));

    let l = ContentLibrary::reference();
    for kind in SystemKind::ALL {
        let design = SystemDesign::new(kind, &c, &l).map_err(|e| e.to_string())?;
        let sim = Simulator::from_design(&design, &c, &l).map_err(|e| e.to_string())?;
        let (a, b) = (sim.run_campaign(1000, 5).unwrap(), sim.run_campaign(1000, 5).unwrap());
        if a != b {
            return Err(format!("{kind}: reruns differ"));
        }
    }
    parts.push("reruns bit-identical".into());
    Ok(parts.join(", "))
}

fn probabilities(r: &AnalyticReport) -> Vec<f64> {
    let mut v = vec![r.p_s, r.p_d, r.op, r.sp_d2d, r.sp_cell, r.sp_total];
    for f in &r.per_file {
        v.extend([f.d2d_coverage, f.d2d_success, f.cellular_success]);
    }
    v
}

fn quadrature_robustness() -> Check {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (d_l, rate) in [(75.0, 1e9), (50.0, 0.5e9)] {
        let l = ContentLibrary::with_uniform_rate(100, 1.2, rate, 2, 50).map_err(|e| e.to_string())?;
        for lambda_u in LAMBDAS {
            let c = NetworkConfig {
                lambda_u,
                d_l,
                ..NetworkConfig::reference()
            };
            for kind in SystemKind::ALL {
                let d = SystemDesign::new(kind, &c, &l).map_err(|e| e.to_string())?;
                let coarse = d.analytic(&c, &l, &AnalyticOptions::with_rel_tol(1e-8)).map_err(|e| e.to_string())?;
                let fine = d.analytic(&c, &l, &AnalyticOptions::with_rel_tol(5e-9)).map_err(|e| e.to_string())?;
                for (x, y) in probabilities(&coarse).into_iter().zip(probabilities(&fine)) {
                    worst = worst.max((x - y).abs());
                    count += 1;
                }
            }
        }
    }
    ensure(
        worst < 1e-6,
        format!("max change {worst:.1e} over {count} probabilities when rel_tol 1e-8 → 5e-9"),
    )
}

fn main() -> ExitCode {
    let pool = match workers_from_env().and_then(build_pool) {
        Ok(p) => p,
        Err(e) => {
            println!("FAIL  setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut suite = Suite { failed: 0 };
    let mut reports = Vec::new();

    suite.run(1, "optimizer vs grid oracle", Some(Duration::from_secs(60)), optimizer_matches_oracle);
    suite.run(2, "Campbell interference", Some(Duration::from_secs(120)), campbell);
    suite.run(3, "analytic vs simulation", Some(Duration::from_secs(300)), || {
        analytic_vs_simulation(&pool, &mut reports)
    });

    let sweeps = [(75.0, 1e9), (50.0, 0.5e9), (50.0, 1e9)].map(|(d_l, rate)| run_sweep(&pool, d_l, rate));
    for s in sweeps.iter().flatten() {
        reports.extend(s.rows.iter().flat_map(|r| r.iter().map(|p| p.simulated)));
    }
    let sweep_error = sweeps.iter().find_map(|s| s.as_ref().err().cloned());
    let [s75, s50_half, s50_full] = sweeps;
    let with = |f: &dyn Fn(&Sweep, &Sweep, &Sweep) -> Check| match (&s75, &s50_half, &s50_full) {
        (Ok(a), Ok(b), Ok(c)) => f(a, b, c),
        _ => Err(format!("sweep failed: {}", sweep_error.clone().unwrap_or_default())),
    };

    suite.run(4, "SP ordering over λ_u", None, || with(&|a, b, _| fig1_ordering(&[a, b])));
    suite.run(5, "offloading ordering over λ_u", None, || {
        with(&|a, _, c| fig2_offloading(&[a, c]))
    });
    suite.run(6, "D2D energy efficiency", None, || {
        with(&|a, b, _| energy_efficiency(&[(a, 1.15), (b, 2.0)]))
    });
    suite.run(7, "statistical sanity", Some(Duration::from_secs(120)), || statistical_sanity(&reports));
    suite.run(8, "quadrature robustness", None, quadrature_robustness);

    if suite.failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", suite.failed);
        ExitCode::FAILURE
    }
}
