use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mmcache::config::sweep_points;
use mmcache::experiment::{evaluate_point, ExperimentSummary};
use mmcache::{build_pool, compare_csv, load_spec, run_experiment, workers_from_env, ExperimentSpec};
use mmcache_core::system::SystemDesign;

#[derive(Parser)]
#[command(name = "mmcache", version, about = "Cache placement, analysis and simulation for mmWave D2D caching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the caching probabilities of each system.
    Optimize(Common),
    /// Evaluate the analytic success probabilities at every sweep point.
    Analytic(Common),
    /// Simulate the base point (sweeps are ignored).
    Simulate(Common),
    /// Run the full sweep and write CSV.
    Sweep(Common),
    /// Compare S-1 against S-2 in a sweep CSV.
    Compare {
        /// CSV written by `sweep`.
        csv: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, short)]
    config: PathBuf,
    /// Override the number of trials per point.
    #[arg(long)]
    trials: Option<u64>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (defaults to `output` in the config, then stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentSpec> {
        let mut spec = load_spec(&self.config).with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(t) = self.trials {
            anyhow::ensure!(t > 0, "--trials must be at least 1");
            spec.trials = t;
        }
        if let Some(s) = self.seed {
            spec.base_seed = s;
        }
        if let Some(out) = &self.out {
            spec.output = Some(out.clone());
        }
        Ok(spec)
    }
}

fn output(spec: &ExperimentSpec) -> Result<Box<dyn Write>> {
    Ok(match &spec.output {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn optimize(spec: &ExperimentSpec) -> Result<bool> {
    let point = &sweep_points(spec)[0];
    let library = point.library.build()?;
    let mut out = output(spec)?;
    for &kind in &spec.systems {
        let d = SystemDesign::new(kind, &point.config, &library)?;
        let p = &d.policy;
        writeln!(out, "{kind}: occupancy {:.6} of {}", p.occupancy(), library.m_d)?;
        if let Some(mu) = p.mu_star {
            writeln!(out, "  mu* = {mu:.6e} after {} iterations", p.iterations)?;
        }
        writeln!(out, "  {:>5} {:>12} {:>12} {:>10}", "file", "popularity", "q", "radius")?;
        for (i, (&q, &beta)) in p.q().iter().zip(library.popularity()).enumerate() {
            if q > 0.0 {
                writeln!(out, "  {i:>5} {beta:>12.6} {q:>12.6} {:>10.3}", d.search_radii[i])?;
            }
        }
    }
    Ok(true)
}

fn analytic(spec: &ExperimentSpec) -> Result<bool> {
    let mut out = output(spec)?;
    let mut ok = true;
    writeln!(out, "{:<32} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}", "point", "system", "p_s", "p_d", "sp_d2d", "sp_cell", "sp")?;
    for point in sweep_points(spec) {
        let label = point.values.iter().map(|(k, v)| format!("{}={v}", k.name())).collect::<Vec<_>>().join(", ");
        let library = point.library.build()?;
        for &kind in &spec.systems {
            let report = SystemDesign::new(kind, &point.config, &library)
                .and_then(|d| d.analytic(&point.config, &library, &spec.analytic));
            match report {
                Ok(r) => writeln!(
                    out,
                    "{label:<32} {kind:>6} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
                    r.p_s, r.p_d, r.sp_d2d, r.sp_cell, r.sp_total
                )?,
                Err(e) => {
                    ok = false;
                    writeln!(out, "{label:<32} {kind:>6} failed: {e}")?;
                }
            }
        }
    }
    Ok(ok)
}

fn simulate(spec: &ExperimentSpec) -> Result<bool> {
    let pool = build_pool(workers_from_env()?)?;
    let point = &sweep_points(&ExperimentSpec { sweep: Vec::new(), ..spec.clone() })[0];
    let mut out = output(spec)?;
    let mut ok = true;
    for &kind in &spec.systems {
        match pool.install(|| evaluate_point(spec, point, kind)) {
            Ok(r) => {
                let s = &r.simulated;
                let ee = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"));
                writeln!(out, "{kind} ({} trials, seed {})", s.trials, spec.base_seed)?;
                writeln!(out, "  sp      {:.5} ± {:.5}   (analytic {:.5})", s.sp.value, s.sp.half_width, r.analytic.sp_total)?;
                writeln!(out, "  self    {:.5} ± {:.5}   (analytic {:.5})", s.self_hit.value, s.self_hit.half_width, r.analytic.p_s)?;
                writeln!(out, "  d2d     {:.5} ± {:.5}   (analytic {:.5})", s.d2d_fraction.value, s.d2d_fraction.half_width, r.analytic.p_d)?;
                writeln!(out, "  op_d    {:.5} ± {:.5}", s.op_d.value, s.op_d.half_width)?;
                writeln!(out, "  sop_d   {:.5} ± {:.5}", s.sop_d.value, s.sop_d.half_width)?;
                writeln!(out, "  ee      {} bit/J total, {} bit/J D2D", ee(s.ee_total), ee(s.ee_d2d))?;
            }
            Err(e) => {
                ok = false;
                writeln!(out, "{kind}: failed: {e}")?;
            }
        }
    }
    Ok(ok)
}

fn sweep(spec: &ExperimentSpec) -> Result<bool> {
    let pool = build_pool(workers_from_env()?)?;
    let summary: ExperimentSummary = run_experiment(spec, &pool, output(spec)?)?;
    if !summary.completed() {
        eprintln!("{} of {} points failed", summary.failures(), summary.rows.len());
    }
    Ok(summary.completed())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Optimize(c) => optimize(&c.load()?),
        Command::Analytic(c) => analytic(&c.load()?),
        Command::Simulate(c) => simulate(&c.load()?),
        Command::Sweep(c) => sweep(&c.load()?),
        Command::Compare { csv } => {
            let file = File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            println!("{}", compare_csv(file)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
