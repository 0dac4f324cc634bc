//! Monte Carlo engine.
//!
//! Each trial samples a fresh network around a typical user at the origin,
//! resolves the requests of every active MU in the observation disk, and
//! realizes fading and interference for the typical user's link only.

mod campbell;
mod metrics;
mod seed;
mod topology;

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

pub use campbell::{campbell_monte_carlo, CampbellEstimate};
pub use metrics::{energy_metrics, Estimate, MetricsAccumulator, MetricsReport, TrialOutcome};
pub use seed::{splitmix64, sub_seed, trial_seed};
pub use topology::{assign_caches, generate_topology, CacheAssignment, MobileUser, Point, Topology};

use crate::association::{decide, DeliveryDecision, DeliveryMode};
use crate::error::{Error, Result};
use crate::model::{ContentLibrary, DerivedConstants, NetworkConfig};
use crate::system::SystemDesign;
use topology::UserGrid;

const STREAM_TOPOLOGY: u64 = 0;
const STREAM_CACHES: u64 = 1;
const STREAM_REQUESTS: u64 = 2;
const STREAM_CHANNEL: u64 = 3;

/// Inverse-CDF sampler of file requests.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestSampler {
    cdf: Vec<f64>,
}

impl RequestSampler {
    pub fn new(popularity: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = popularity
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cdf }
    }

    /// File index for a uniform draw `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Decisions for the active MUs of one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct Associations {
    /// `(user index, decision)`; the typical user comes first.
    pub decisions: Vec<(usize, DeliveryDecision)>,
}

impl Associations {
    pub fn typical(&self) -> &DeliveryDecision {
        &self.decisions[0].1
    }

    /// Distinct D2D transmitters serving someone other than the typical user,
    /// excluding the typical user's own server.
    pub fn interferers(&self) -> Vec<usize> {
        let own = self.typical().server;
        let mut servers: Vec<usize> = self.decisions[1..]
            .iter()
            .filter_map(|(_, d)| d.server)
            .filter(|s| Some(*s) != own)
            .collect();
        servers.sort_unstable();
        servers.dedup();
        servers
    }
}

/// Everything needed to run trials of one (network, placement, radii) design.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulator {
    config: NetworkConfig,
    library: ContentLibrary,
    constants: DerivedConstants,
    q: Vec<f64>,
    search_radii: Vec<f64>,
    requests: RequestSampler,
    /// Mean cellular interference from RRHs beyond the window.
    far_field: f64,
}

impl Simulator {
    pub fn new(config: &NetworkConfig, library: &ContentLibrary, q: &[f64], search_radii: &[f64]) -> Result<Self> {
        config.validate()?;
        if q.len() != library.len() || search_radii.len() != library.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "placement ({}) and search radii ({}) must cover the {} files",
                q.len(),
                search_radii.len(),
                library.len()
            )));
        }
        if let Some(r) = search_radii.iter().find(|r| !(**r >= 0.0)) {
            return Err(Error::InvalidArgument(alloc::format!("search radius {r} must be ≥ 0")));
        }
        if !(config.sim_radius > config.d_r + config.d_l) {
            return Err(Error::config("sim_radius", "window must exceed D_R + D_L"));
        }
        let a = config.alpha_c;
        let far_field = 2.0 * PI * config.lambda_r * config.sim_radius.powf(2.0 - a) / (a - 2.0);
        Ok(Self {
            config: config.clone(),
            library: library.clone(),
            constants: DerivedConstants::new(config, library)?,
            q: q.to_vec(),
            search_radii: search_radii.iter().map(|&r| r.min(config.d_r)).collect(),
            requests: RequestSampler::new(library.popularity()),
            far_field,
        })
    }

    pub fn from_design(design: &SystemDesign, config: &NetworkConfig, library: &ContentLibrary) -> Result<Self> {
        Self::new(config, library, design.policy.q(), &design.search_radii)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn library(&self) -> &ContentLibrary {
        &self.library
    }

    pub fn topology(&self, trial_seed: u64) -> Result<Topology> {
        generate_topology(&self.config, sub_seed(trial_seed, STREAM_TOPOLOGY))
    }

    pub fn caches(&self, topology: &Topology, trial_seed: u64) -> Result<CacheAssignment> {
        assign_caches(topology, &self.q, sub_seed(trial_seed, STREAM_CACHES))
    }

    fn decide_for(
        &self,
        topology: &Topology,
        caches: &CacheAssignment,
        grid: &UserGrid,
        user: usize,
        file: usize,
    ) -> DeliveryDecision {
        let self_hit = caches.contains(user, file);
        let radius = self.search_radii[file];
        let nearest = if self_hit {
            None
        } else {
            grid.nearest_cacher(topology, caches, topology.users[user].position, file, radius)
        };
        decide(file, self_hit, nearest, self.library.in_edge_cloud(file), radius, &self.config)
    }

    /// Draws a request for every active MU in the observation disk
    /// (radius `mu_radius`) and associates it. With `typical_only`, only the
    /// typical user is resolved.
    fn resolve(&self, topology: &Topology, caches: &CacheAssignment, trial_seed: u64, typical_only: bool) -> Associations {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(trial_seed, STREAM_REQUESTS));
        let grid = UserGrid::inactive(topology, (self.config.d_r / 2.0).max(1.0));
        let mut decisions = Vec::new();
        for (idx, u) in topology.users.iter().enumerate() {
            if !u.active || u.position.norm() > self.config.mu_radius {
                continue;
            }
            let file = self.requests.sample(rng.random::<f64>());
            decisions.push((idx, self.decide_for(topology, caches, &grid, idx, file)));
            if typical_only {
                break;
            }
        }
        Associations { decisions }
    }

    /// Resolves every active MU's request in the observation disk.
    pub fn resolve_associations(&self, topology: &Topology, caches: &CacheAssignment, trial_seed: u64) -> Associations {
        self.resolve(topology, caches, trial_seed, false)
    }

    /// Realizes the typical user's link and judges it against the rate
    /// constraint.
    pub fn evaluate_typical_user(&self, topology: &Topology, associations: &Associations, trial_seed: u64) -> TrialOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(trial_seed, STREAM_CHANNEL));
        let decision = *associations.typical();
        let file = decision.file;
        let rate = self.library.rates()[file];
        let c = &self.config;
        let (sinr, power) = match decision.mode {
            DeliveryMode::SelfCache => (None, 0.0),
            DeliveryMode::D2dLos | DeliveryMode::D2dNlos => {
                let r = decision.server_distance.unwrap_or(0.0);
                let h: f64 = Exp1.sample(&mut rng);
                let signal = c.g_m * c.g_m * h * path_loss(r, c.d2d_exponent(r));
                let mut interference = 0.0;
                for s in associations.interferers() {
                    let y = topology.users[s].position.norm();
                    let g = self.constants.gain_pmf.sample(rng.random::<f64>());
                    let h: f64 = Exp1.sample(&mut rng);
                    interference += g * h * path_loss(y, c.d2d_exponent(y));
                }
                (Some(signal / (self.constants.n_hat + interference)), c.p_d)
            }
            DeliveryMode::CellularFronthaul | DeliveryMode::CellularBackhaul => {
                let power = if decision.mode == DeliveryMode::CellularBackhaul {
                    c.p_c + c.p_b
                } else {
                    c.p_c
                };
                (Some(self.cellular_sinr(topology, &mut rng)), power)
            }
        };
        let threshold = match decision.mode {
            DeliveryMode::SelfCache => 0.0,
            m if m.is_d2d() => self.constants.d2d_thresholds[file],
            _ => self.constants.cellular_thresholds[file],
        };
        let success = sinr.is_none_or(|s| s >= threshold);
        TrialOutcome {
            decision,
            sinr,
            success,
            throughput: if success { rate } else { 0.0 },
            power,
            file,
        }
    }

    fn cellular_sinr<R: Rng>(&self, topology: &Topology, rng: &mut R) -> f64 {
        let a = self.config.alpha_c;
        let Some(serving) = (0..topology.rrhs.len()).min_by(|&i, &j| {
            topology.rrhs[i].norm().total_cmp(&topology.rrhs[j].norm())
        }) else {
            return 0.0;
        };
        let mut signal = 0.0;
        let mut interference = self.far_field;
        for (i, p) in topology.rrhs.iter().enumerate() {
            let h: f64 = Exp1.sample(rng);
            let gain = h * path_loss(p.norm(), a);
            if i == serving {
                signal = gain;
            } else {
                interference += gain;
            }
        }
        signal / (self.constants.n_hat_c + interference)
    }

    /// One independent trial.
    pub fn run_trial(&self, trial_seed: u64) -> Result<TrialOutcome> {
        let topology = self.topology(trial_seed)?;
        let caches = self.caches(&topology, trial_seed)?;
        let mut assoc = self.resolve(&topology, &caches, trial_seed, true);
        // Other users only matter through the D2D interference they create.
        if assoc.typical().mode.is_d2d() {
            assoc = self.resolve(&topology, &caches, trial_seed, false);
        }
        Ok(self.evaluate_typical_user(&topology, &assoc, trial_seed))
    }

    /// Trials `range` of the campaign seeded by `base_seed`, accumulated in
    /// index order.
    pub fn run_trials(&self, range: core::ops::Range<u64>, base_seed: u64) -> Result<MetricsAccumulator> {
        let mut acc = MetricsAccumulator::default();
        for i in range {
            acc.add(&self.run_trial(trial_seed(base_seed, i))?);
        }
        Ok(acc)
    }

    pub fn run_campaign(&self, trials: u64, base_seed: u64) -> Result<MetricsReport> {
        if trials == 0 {
            return Err(Error::InvalidArgument("a campaign needs at least one trial".into()));
        }
        Ok(self.run_trials(0..trials, base_seed)?.report())
    }
}

/// Unbounded path loss r^{-α}.
fn path_loss(r: f64, alpha: f64) -> f64 {
    r.powf(-alpha)
}

/// Runs `trials` independent trials of `(q, search radii)` on the network.
pub fn run_campaign(
    config: &NetworkConfig,
    library: &ContentLibrary,
    q: &[f64],
    search_radii: &[f64],
    trials: u64,
    base_seed: u64,
) -> Result<MetricsReport> {
    Simulator::new(config, library, q, search_radii)?.run_campaign(trials, base_seed)
}
