//! Experiment files (TOML).
//!
//! Quantities are SI unless the key says otherwise: keys ending in `_db`
//! are decibels, `n_o_dbm_hz` is dBm/Hz. Only `lambda_u` is required; every
//! other key falls back to the reference network.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mmcache_core::analytic::{AnalyticOptions, LaplaceIntegrand};
use mmcache_core::model::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm, ContentLibrary, NetworkConfig};
use mmcache_core::quad::Quadrature;
use mmcache_core::system::SystemKind;
use serde::{Deserialize, Serialize};

pub const REQUIRED_FIELDS: [&str; 1] = ["lambda_u"];
pub const MAX_SWEEP_AXES: usize = 2;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("missing required field(s): {}", .0.join(", "))]
    Missing(Vec<&'static str>),
    #[error("invalid value for `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    fn from_core(e: mmcache_core::Error, context: &str) -> Self {
        match e {
            mmcache_core::Error::InvalidConfig { field, reason } => Self::invalid(field, format!("{reason}{context}")),
            other => Self::invalid("config", format!("{other}{context}")),
        }
    }
}

/// Parameters that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    LambdaU,
    LambdaR,
    Rho,
    DL,
    DR,
    Rate,
    Epsilon,
    MD,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::LambdaU => "lambda_u",
            SweepParam::LambdaR => "lambda_r",
            SweepParam::Rho => "rho",
            SweepParam::DL => "d_l",
            SweepParam::DR => "d_r",
            SweepParam::Rate => "rate",
            SweepParam::Epsilon => "epsilon",
            SweepParam::MD => "m_d",
        }
    }

    pub fn apply(self, value: f64, config: &mut NetworkConfig, library: &mut LibrarySpec) {
        match self {
            SweepParam::LambdaU => config.lambda_u = value,
            SweepParam::LambdaR => config.lambda_r = value,
            SweepParam::Rho => config.rho = value,
            SweepParam::DL => config.d_l = value,
            SweepParam::DR => config.d_r = value,
            SweepParam::Rate => {
                library.rate = value;
                library.rates = None;
            }
            SweepParam::Epsilon => library.epsilon = value,
            SweepParam::MD => library.m_d = value as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Library description: uniform `rate` unless per-file `rates` are given.
#[derive(Debug, Clone, PartialEq)]
pub struct LibrarySpec {
    pub n_files: usize,
    pub epsilon: f64,
    pub rate: f64,
    pub rates: Option<Vec<f64>>,
    pub m_d: usize,
    pub m_e: usize,
}

impl Default for LibrarySpec {
    fn default() -> Self {
        Self {
            n_files: 100,
            epsilon: 1.2,
            rate: 1e9,
            rates: None,
            m_d: 2,
            m_e: 50,
        }
    }
}

impl LibrarySpec {
    pub fn build(&self) -> Result<ContentLibrary, mmcache_core::Error> {
        let rates = match &self.rates {
            Some(r) => r.clone(),
            None => vec![self.rate; self.n_files],
        };
        if rates.is_empty() {
            return Err(mmcache_core::Error::InvalidConfig {
                field: "n_files",
                reason: "library must hold at least one file".into(),
            });
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(mmcache_core::Error::InvalidConfig {
                field: "epsilon",
                reason: "must be finite and ≥ 0".into(),
            });
        }
        ContentLibrary::new(self.epsilon, rates, self.m_d, self.m_e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub config: NetworkConfig,
    pub library: LibrarySpec,
    pub sweep: Vec<SweepAxis>,
    pub systems: Vec<SystemKind>,
    pub trials: u64,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
    pub analytic: AnalyticOptions,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    lambda_u: Option<f64>,
    lambda_r: Option<f64>,
    rho: Option<f64>,
    p_c: Option<f64>,
    p_d: Option<f64>,
    p_b: Option<f64>,
    f_c_cell: Option<f64>,
    f_c_mm: Option<f64>,
    b_c: Option<f64>,
    b_d: Option<f64>,
    alpha_c: Option<f64>,
    alpha_l: Option<f64>,
    alpha_n: Option<f64>,
    d_l: Option<f64>,
    d_r: Option<f64>,
    g_m_db: Option<f64>,
    g_s_db: Option<f64>,
    delta_theta: Option<f64>,
    g_t_db: Option<f64>,
    g_r_db: Option<f64>,
    n_o_dbm_hz: Option<f64>,
    f_n_db: Option<f64>,
    sim_radius: Option<f64>,
    mu_radius: Option<f64>,
    n_files: Option<usize>,
    epsilon: Option<f64>,
    rate: Option<f64>,
    rates: Option<Vec<f64>>,
    m_d: Option<usize>,
    m_e: Option<usize>,
    systems: Option<Vec<String>>,
    trials: Option<u64>,
    base_seed: Option<u64>,
    output: Option<PathBuf>,
    analytic: Option<RawAnalytic>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sweep: Vec<SweepAxis>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalytic {
    laplace_integrand: Option<String>,
    rel_tol: Option<f64>,
}

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_spec(&text)
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let raw: RawSpec = toml::from_str(text)?;
    let Some(lambda_u) = raw.lambda_u else {
        return Err(ConfigError::Missing(REQUIRED_FIELDS.to_vec()));
    };
    let r = NetworkConfig::reference();
    let config = NetworkConfig {
        lambda_u,
        lambda_r: raw.lambda_r.unwrap_or(r.lambda_r),
        rho: raw.rho.unwrap_or(r.rho),
        p_c: raw.p_c.unwrap_or(r.p_c),
        p_d: raw.p_d.unwrap_or(r.p_d),
        p_b: raw.p_b.unwrap_or(r.p_b),
        f_c_cell: raw.f_c_cell.unwrap_or(r.f_c_cell),
        f_c_mm: raw.f_c_mm.unwrap_or(r.f_c_mm),
        b_c: raw.b_c.unwrap_or(r.b_c),
        b_d: raw.b_d.unwrap_or(r.b_d),
        alpha_c: raw.alpha_c.unwrap_or(r.alpha_c),
        alpha_l: raw.alpha_l.unwrap_or(r.alpha_l),
        alpha_n: raw.alpha_n.unwrap_or(r.alpha_n),
        d_l: raw.d_l.unwrap_or(r.d_l),
        d_r: raw.d_r.unwrap_or(r.d_r),
        g_m: raw.g_m_db.map_or(r.g_m, db_to_linear),
        g_s: raw.g_s_db.map_or(r.g_s, db_to_linear),
        delta_theta: raw.delta_theta.unwrap_or(r.delta_theta),
        g_t: raw.g_t_db.map_or(r.g_t, db_to_linear),
        g_r: raw.g_r_db.map_or(r.g_r, db_to_linear),
        n_o: raw.n_o_dbm_hz.map_or(r.n_o, dbm_to_watts),
        f_n: raw.f_n_db.map_or(r.f_n, db_to_linear),
        sim_radius: raw.sim_radius.unwrap_or(r.sim_radius),
        mu_radius: raw.mu_radius.unwrap_or(r.mu_radius),
    };
    let d = LibrarySpec::default();
    let library = LibrarySpec {
        n_files: raw.rates.as_ref().map_or(raw.n_files.unwrap_or(d.n_files), Vec::len),
        epsilon: raw.epsilon.unwrap_or(d.epsilon),
        rate: raw.rate.unwrap_or(d.rate),
        rates: raw.rates,
        m_d: raw.m_d.unwrap_or(d.m_d),
        m_e: raw.m_e.unwrap_or(d.m_e),
    };
    let systems = match raw.systems {
        None => SystemKind::ALL.to_vec(),
        Some(labels) => labels
            .iter()
            .map(|s| {
                SystemKind::from_label(s)
                    .ok_or_else(|| ConfigError::invalid("systems", format!("unknown system `{s}` (expected S-1 or S-2)")))
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    if systems.is_empty() {
        return Err(ConfigError::invalid("systems", "at least one system is required"));
    }
    let mut analytic = AnalyticOptions::default();
    if let Some(a) = raw.analytic {
        if let Some(name) = a.laplace_integrand {
            analytic.integrand = match name.as_str() {
                "corrected" => LaplaceIntegrand::Corrected,
                "as-printed" => LaplaceIntegrand::AsPrinted,
                other => {
                    return Err(ConfigError::invalid(
                        "analytic.laplace_integrand",
                        format!("`{other}` is not one of corrected, as-printed"),
                    ))
                }
            };
        }
        if let Some(tol) = a.rel_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(ConfigError::invalid("analytic.rel_tol", "must lie in (0, 1)"));
            }
            analytic.quadrature = Quadrature::with_rel_tol(tol);
        }
    }
    let spec = ExperimentSpec {
        config,
        library,
        sweep: raw.sweep,
        systems,
        trials: raw.trials.unwrap_or(10_000),
        base_seed: raw.base_seed.unwrap_or(1),
        output: raw.output,
        analytic,
    };
    validate(&spec)?;
    Ok(spec)
}

fn validate(spec: &ExperimentSpec) -> Result<(), ConfigError> {
    if spec.trials == 0 {
        return Err(ConfigError::invalid("trials", "must be at least 1"));
    }
    if spec.sweep.len() > MAX_SWEEP_AXES {
        return Err(ConfigError::invalid(
            "sweep",
            format!("at most {MAX_SWEEP_AXES} axes, got {}", spec.sweep.len()),
        ));
    }
    for (i, axis) in spec.sweep.iter().enumerate() {
        if axis.values.is_empty() {
            return Err(ConfigError::invalid(format!("sweep.{}", axis.param.name()), "no values"));
        }
        if spec.sweep[..i].iter().any(|a| a.param == axis.param) {
            return Err(ConfigError::invalid(format!("sweep.{}", axis.param.name()), "swept twice"));
        }
        if let Some(v) = axis.values.iter().find(|v| !v.is_finite()) {
            return Err(ConfigError::invalid(format!("sweep.{}", axis.param.name()), format!("non-finite value {v}")));
        }
        if axis.param == SweepParam::MD {
            if let Some(v) = axis.values.iter().find(|v| v.fract() != 0.0 || **v < 0.0) {
                return Err(ConfigError::invalid("sweep.m_d", format!("{v} is not a file count")));
            }
        }
    }
    for point in sweep_points(spec) {
        let context = describe(&point);
        point.config.validate().map_err(|e| ConfigError::from_core(e, &context))?;
        point.library.build().map_err(|e| ConfigError::from_core(e, &context))?;
    }
    Ok(())
}

fn describe(point: &SweepPoint) -> String {
    let mut s = String::new();
    for (param, value) in &point.values {
        let _ = write!(s, "{}{} = {value}", if s.is_empty() { " (at " } else { ", " }, param.name());
    }
    if !s.is_empty() {
        s.push(')');
    }
    s
}

/// One network configuration of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub values: Vec<(SweepParam, f64)>,
    pub config: NetworkConfig,
    pub library: LibrarySpec,
}

/// Cartesian product of the sweep axes, first axis outermost. A spec
/// without axes has the single base point.
pub fn sweep_points(spec: &ExperimentSpec) -> Vec<SweepPoint> {
    let mut points = vec![SweepPoint {
        values: Vec::new(),
        config: spec.config.clone(),
        library: spec.library.clone(),
    }];
    for axis in &spec.sweep {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    axis.param.apply(v, &mut q.config, &mut q.library);
                    q.values.push((axis.param, v));
                    q
                })
            })
            .collect();
    }
    points
}

/// Serializes a spec; `parse_spec(&write_spec(s))` reproduces `s` up to
/// rounding in the dB conversions.
pub fn write_spec(spec: &ExperimentSpec) -> String {
    let c = &spec.config;
    let l = &spec.library;
    let raw = RawSpec {
        lambda_u: Some(c.lambda_u),
        lambda_r: Some(c.lambda_r),
        rho: Some(c.rho),
        p_c: Some(c.p_c),
        p_d: Some(c.p_d),
        p_b: Some(c.p_b),
        f_c_cell: Some(c.f_c_cell),
        f_c_mm: Some(c.f_c_mm),
        b_c: Some(c.b_c),
        b_d: Some(c.b_d),
        alpha_c: Some(c.alpha_c),
        alpha_l: Some(c.alpha_l),
        alpha_n: Some(c.alpha_n),
        d_l: Some(c.d_l),
        d_r: Some(c.d_r),
        g_m_db: Some(linear_to_db(c.g_m)),
        g_s_db: Some(linear_to_db(c.g_s)),
        delta_theta: Some(c.delta_theta),
        g_t_db: Some(linear_to_db(c.g_t)),
        g_r_db: Some(linear_to_db(c.g_r)),
        n_o_dbm_hz: Some(watts_to_dbm(c.n_o)),
        f_n_db: Some(linear_to_db(c.f_n)),
        sim_radius: Some(c.sim_radius),
        mu_radius: Some(c.mu_radius),
        n_files: Some(l.n_files),
        epsilon: Some(l.epsilon),
        rate: Some(l.rate),
        rates: l.rates.clone(),
        m_d: Some(l.m_d),
        m_e: Some(l.m_e),
        systems: Some(spec.systems.iter().map(|s| s.label().to_string()).collect()),
        trials: Some(spec.trials),
        base_seed: Some(spec.base_seed),
        output: spec.output.clone(),
        analytic: Some(RawAnalytic {
            laplace_integrand: Some(
                match spec.analytic.integrand {
                    LaplaceIntegrand::Corrected => "corrected",
                    LaplaceIntegrand::AsPrinted => "as-printed",
                }
                .to_string(),
            ),
            rel_tol: Some(spec.analytic.quadrature.rel_tol),
        }),
        sweep: spec.sweep.clone(),
    };
    toml::to_string(&raw).expect("experiment spec serializes to TOML")
}
