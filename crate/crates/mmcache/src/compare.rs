//! S-1 / S-2 ratios from a sweep CSV.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use mmcache_core::system::SystemKind;

use crate::experiment::FAILURE_MARKER;

#[derive(Debug, thiserror::Error)]
pub enum CompareError {
    #[error("CSV input: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: {reason}")]
    BadRow { row: usize, reason: String },
    #[error("point [{point}] has no {system} row")]
    MissingSystem { point: String, system: SystemKind },
    #[error("no sweep points in input")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Metrics {
    sp: f64,
    sop_d: f64,
    ee_d2d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRatio {
    /// Sweep values as written in the input, e.g. `d_l=75, lambda_u=0.0005`.
    pub point: String,
    pub sp: f64,
    pub sop_d: f64,
    pub ee_d2d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub points: Vec<PointRatio>,
    pub mean_sp: f64,
    pub mean_sop_d: f64,
    /// Mean over points where both systems have a D2D energy efficiency.
    pub mean_ee_d2d: Option<f64>,
}

pub fn compare_csv<R: Read>(input: R) -> Result<CompareReport, CompareError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &'static str| headers.iter().position(|h| h == name).ok_or(CompareError::MissingColumn(name));
    let system_col = col("system")?;
    let (sp_col, sop_col, ee_col) = (col("sp")?, col("sop_d")?, col("ee_d2d")?);
    let keys: Vec<String> = headers.iter().take(system_col).map(str::to_string).collect();

    let mut order: Vec<String> = Vec::new();
    let mut table: BTreeMap<(String, SystemKind), Metrics> = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |reason: String| CompareError::BadRow { row, reason };
        let point = keys
            .iter()
            .zip(rec.iter())
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ");
        let label = rec.get(system_col).unwrap_or_default();
        let system = SystemKind::from_label(label).ok_or_else(|| bad(format!("unknown system `{label}`")))?;
        let field = |c: usize| rec.get(c).unwrap_or_default();
        if field(sp_col).starts_with(FAILURE_MARKER) {
            return Err(bad(format!("point [{point}] failed: {}", field(sp_col))));
        }
        let num = |c: usize| field(c).parse::<f64>().map_err(|_| bad(format!("`{}` is not a number", field(c))));
        let metrics = Metrics {
            sp: num(sp_col)?,
            sop_d: num(sop_col)?,
            ee_d2d: if field(ee_col).is_empty() { None } else { Some(num(ee_col)?) },
        };
        if !order.contains(&point) {
            order.push(point.clone());
        }
        table.insert((point, system), metrics);
    }
    if order.is_empty() {
        return Err(CompareError::Empty);
    }

    let mut points = Vec::with_capacity(order.len());
    for point in order {
        let get = |system: SystemKind| {
            table.get(&(point.clone(), system)).copied().ok_or_else(|| CompareError::MissingSystem {
                point: point.clone(),
                system,
            })
        };
        let (a, b) = (get(SystemKind::Proposed)?, get(SystemKind::HitMaxBaseline)?);
        points.push(PointRatio {
            sp: a.sp / b.sp,
            sop_d: a.sop_d / b.sop_d,
            ee_d2d: a.ee_d2d.zip(b.ee_d2d).map(|(x, y)| x / y),
            point,
        });
    }
    let n = points.len() as f64;
    let ee: Vec<f64> = points.iter().filter_map(|p| p.ee_d2d).collect();
    Ok(CompareReport {
        mean_sp: points.iter().map(|p| p.sp).sum::<f64>() / n,
        mean_sop_d: points.iter().map(|p| p.sop_d).sum::<f64>() / n,
        mean_ee_d2d: (!ee.is_empty()).then(|| ee.iter().sum::<f64>() / ee.len() as f64),
        points,
    })
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ee = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        writeln!(f, "{:<40} {:>10} {:>10} {:>10}", "point", "sp", "sop_d", "ee_d2d")?;
        for p in &self.points {
            let label = if p.point.is_empty() { "(base)" } else { &p.point };
            writeln!(f, "{label:<40} {:>10.4} {:>10.4} {:>10}", p.sp, p.sop_d, ee(p.ee_d2d))?;
        }
        write!(
            f,
            "{:<40} {:>10.4} {:>10.4} {:>10}",
            "mean S-1/S-2",
            self.mean_sp,
            self.mean_sop_d,
            ee(self.mean_ee_d2d)
        )
    }
}
