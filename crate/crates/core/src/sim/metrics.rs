//! Per-trial outcomes and their aggregation.

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::association::{DeliveryDecision, DeliveryMode};

/// Result of serving the typical user's request in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub decision: DeliveryDecision,
    /// Linear SINR of the serving link (absent for self-cache hits).
    pub sinr: Option<f64>,
    pub success: bool,
    /// Delivered rate: R_i on success, 0 otherwise.
    pub throughput: f64,
    /// Power spent on the request (W, one normalized time unit).
    pub power: f64,
    pub file: usize,
}

/// Proportion with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn proportion(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                value: f64::NAN,
                half_width: f64::NAN,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        Self {
            value: p,
            half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
        }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }
}

/// Additive running totals over trial outcomes. Merging is exact for the
/// counts; float sums are only bit-reproducible when merged in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsAccumulator {
    pub trials: u64,
    pub successes: u64,
    pub self_hits: u64,
    pub d2d_attempts: u64,
    pub d2d_successes: u64,
    pub cellular_attempts: u64,
    pub cellular_successes: u64,
    pub throughput: f64,
    pub power: f64,
    pub d2d_throughput: f64,
    pub d2d_power: f64,
}

impl MetricsAccumulator {
    pub fn add(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        self.successes += u64::from(o.success);
        self.throughput += o.throughput;
        self.power += o.power;
        match o.decision.mode {
            DeliveryMode::SelfCache => self.self_hits += 1,
            DeliveryMode::D2dLos | DeliveryMode::D2dNlos => {
                self.d2d_attempts += 1;
                self.d2d_successes += u64::from(o.success);
                self.d2d_throughput += o.throughput;
                self.d2d_power += o.power;
            }
            DeliveryMode::CellularFronthaul | DeliveryMode::CellularBackhaul => {
                self.cellular_attempts += 1;
                self.cellular_successes += u64::from(o.success);
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        self.successes += other.successes;
        self.self_hits += other.self_hits;
        self.d2d_attempts += other.d2d_attempts;
        self.d2d_successes += other.d2d_successes;
        self.cellular_attempts += other.cellular_attempts;
        self.cellular_successes += other.cellular_successes;
        self.throughput += other.throughput;
        self.power += other.power;
        self.d2d_throughput += other.d2d_throughput;
        self.d2d_power += other.d2d_power;
    }

    pub fn report(&self) -> MetricsReport {
        let n = self.trials;
        let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
        MetricsReport {
            trials: n,
            sp: Estimate::proportion(self.successes, n),
            self_hit: Estimate::proportion(self.self_hits, n),
            op_d: Estimate::proportion(self.self_hits + self.d2d_attempts, n),
            sop_d: Estimate::proportion(self.self_hits + self.d2d_successes, n),
            d2d_fraction: Estimate::proportion(self.d2d_attempts, n),
            d2d_success: (self.d2d_attempts > 0).then(|| Estimate::proportion(self.d2d_successes, self.d2d_attempts)),
            ee_total: ratio(self.throughput, self.power),
            ee_d2d: ratio(self.d2d_throughput, self.d2d_power),
        }
    }
}

impl<'a> Extend<&'a TrialOutcome> for MetricsAccumulator {
    fn extend<I: IntoIterator<Item = &'a TrialOutcome>>(&mut self, iter: I) {
        for o in iter {
            self.add(o);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub trials: u64,
    pub sp: Estimate,
    pub self_hit: Estimate,
    /// Pr[self-cache ∨ D2D]
    pub op_d: Estimate,
    /// Pr[(self-cache ∨ D2D) ∧ success]
    pub sop_d: Estimate,
    /// Pr[D2D association]
    pub d2d_fraction: Estimate,
    /// Pr[success | D2D association]
    pub d2d_success: Option<Estimate>,
    /// Delivered bits per joule over all requests.
    pub ee_total: Option<f64>,
    /// Delivered bits per joule over D2D attempts.
    pub ee_d2d: Option<f64>,
}

/// (ee_total, ee_d2d) of a set of outcomes; absent where no power was spent.
pub fn energy_metrics(outcomes: &[TrialOutcome]) -> (Option<f64>, Option<f64>) {
    let mut acc = MetricsAccumulator::default();
    acc.extend(outcomes);
    let r = acc.report();
    (r.ee_total, r.ee_d2d)
}
