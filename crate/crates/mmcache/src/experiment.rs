//! Sweeps: every (point, system) pair gets a simulation campaign and an
//! analytic evaluation, written as one CSV row.

use std::io::Write;

use mmcache_core::analytic::AnalyticReport;
use mmcache_core::sim::{trial_seed, MetricsAccumulator, MetricsReport, Simulator};
use mmcache_core::system::{SystemDesign, SystemKind};
use rayon::prelude::*;

use crate::config::{sweep_points, ExperimentSpec, SweepParam, SweepPoint};

/// Environment variable holding the number of worker threads.
pub const WORKERS_ENV: &str = "MMCACHE_WORKERS";

pub const METRIC_COLUMNS: [&str; 12] = [
    "system",
    "sp",
    "sp_ci",
    "op_d",
    "sop_d",
    "ee_total",
    "ee_d2d",
    "p_s",
    "p_d_analytic",
    "sp_analytic",
    "trials",
    "seed",
];

/// Prefix of the `sp` cell in rows whose point could not be evaluated.
pub const FAILURE_MARKER: &str = "FAILED";

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid value for {WORKERS_ENV}: `{0}`")]
    Workers(String),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

/// Worker count from `MMCACHE_WORKERS`; `None` leaves the choice to rayon.
pub fn workers_from_env() -> Result<Option<usize>, ExperimentError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ExperimentError::Workers(v)),
        },
    }
}

pub fn build_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

/// Runs a campaign with trials spread over the current rayon pool. Outcomes
/// are folded in trial order, so the report is identical to a sequential
/// run for any number of workers.
pub fn run_campaign_parallel(sim: &Simulator, trials: u64, base_seed: u64) -> mmcache_core::Result<MetricsReport> {
    if trials == 0 {
        return sim.run_campaign(0, base_seed);
    }
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| sim.run_trial(trial_seed(base_seed, i)))
        .collect::<mmcache_core::Result<Vec<_>>>()?;
    let mut acc = MetricsAccumulator::default();
    acc.extend(&outcomes);
    Ok(acc.report())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub simulated: MetricsReport,
    pub analytic: AnalyticReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub values: Vec<(SweepParam, f64)>,
    pub system: SystemKind,
    pub trials: u64,
    pub seed: u64,
    pub outcome: Result<PointResult, String>,
}

/// Design, analytic evaluation and simulation of one system at one point.
pub fn evaluate_point(
    spec: &ExperimentSpec,
    point: &SweepPoint,
    system: SystemKind,
) -> mmcache_core::Result<PointResult> {
    let library = point.library.build()?;
    let design = SystemDesign::new(system, &point.config, &library)?;
    let analytic = design.analytic(&point.config, &library, &spec.analytic)?;
    let sim = Simulator::from_design(&design, &point.config, &library)?;
    let simulated = run_campaign_parallel(&sim, spec.trials, spec.base_seed)?;
    Ok(PointResult { simulated, analytic })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub rows: Vec<ResultRow>,
}

impl ExperimentSummary {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn completed(&self) -> bool {
        self.failures() == 0
    }
}

pub fn header(spec: &ExperimentSpec) -> Vec<String> {
    spec.sweep
        .iter()
        .map(|a| a.param.name().to_string())
        .chain(METRIC_COLUMNS.iter().map(|c| c.to_string()))
        .collect()
}

fn record(row: &ResultRow) -> Vec<String> {
    let mut out: Vec<String> = row.values.iter().map(|(_, v)| v.to_string()).collect();
    out.push(row.system.label().to_string());
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    match &row.outcome {
        Ok(r) => {
            let s = &r.simulated;
            let a = &r.analytic;
            out.extend([
                s.sp.value.to_string(),
                s.sp.half_width.to_string(),
                s.op_d.value.to_string(),
                s.sop_d.value.to_string(),
                opt(s.ee_total),
                opt(s.ee_d2d),
                a.p_s.to_string(),
                a.p_d.to_string(),
                a.sp_total.to_string(),
            ]);
        }
        Err(e) => {
            out.push(format!("{FAILURE_MARKER}: {e}"));
            out.extend(std::iter::repeat_n(String::new(), 8));
        }
    }
    out.push(row.trials.to_string());
    out.push(row.seed.to_string());
    out
}

/// Evaluates every point of the sweep in order, writing each row as soon as
/// it is known. A failing point produces a marker row and the sweep goes on.
pub fn run_experiment<W: Write>(
    spec: &ExperimentSpec,
    pool: &rayon::ThreadPool,
    out: W,
) -> Result<ExperimentSummary, ExperimentError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(header(spec))?;
    writer.flush()?;
    let mut rows = Vec::new();
    for point in sweep_points(spec) {
        for &system in &spec.systems {
            let outcome = pool.install(|| evaluate_point(spec, &point, system)).map_err(|e| e.to_string());
            let row = ResultRow {
                values: point.values.clone(),
                system,
                trials: spec.trials,
                seed: spec.base_seed,
                outcome,
            };
            writer.write_record(record(&row))?;
            writer.flush()?;
            rows.push(row);
        }
    }
    Ok(ExperimentSummary { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_spec;

    #[test]
    fn parallel_campaign_matches_sequential() {
        let spec = parse_spec("lambda_u = 5e-4").unwrap();
        let lib = spec.library.build().unwrap();
        let design = SystemDesign::new(SystemKind::Proposed, &spec.config, &lib).unwrap();
        let sim = Simulator::from_design(&design, &spec.config, &lib).unwrap();
        let pool = build_pool(Some(3)).unwrap();
        let par = pool.install(|| run_campaign_parallel(&sim, 300, 11)).unwrap();
        assert_eq!(par, sim.run_campaign(300, 11).unwrap());
    }

    #[test]
    fn failure_rows_keep_the_schema() {
        let spec = parse_spec("lambda_u = 5e-4\n[[sweep]]\nparam = \"rho\"\nvalues = [0.5]").unwrap();
        let row = ResultRow {
            values: vec![(SweepParam::Rho, 0.5)],
            system: SystemKind::Proposed,
            trials: 10,
            seed: 1,
            outcome: Err("boom".into()),
        };
        let r = record(&row);
        assert_eq!(r.len(), header(&spec).len());
        assert_eq!(r[2], "FAILED: boom");
    }
}
