//! Distance-threshold user association.
//!
//! Once q* is known, the worst-case interference is rescaled by the fraction
//! γ of requests actually served over LoS D2D links, giving per-file LoS and
//! NLoS QoS distances. A request is then served from the device cache, from
//! the nearest cacher within the search radius D_{i,u}, or by the cellular
//! tier (edge cloud over fronthaul, or core network over backhaul).

use alloc::vec::Vec;


#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{ContentLibrary, DerivedConstants, NetworkConfig};
use crate::placement::{coverage_coefficient, qos_distance, CachingPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationThresholds {
    pub gamma: f64,
    /// D̂_{i,L}
    pub d_hat_l: Vec<f64>,
    /// D̂_{i,N}
    pub d_hat_n: Vec<f64>,
    /// D_{i,u} = min(D̂_{i,L}, max(D̂_{i,N}, D_L), D_R)
    pub d_iu: Vec<f64>,
}

/// Probability that a request is served by a LoS D2D link under q*.
pub fn gamma_los_d2d(policy: &CachingPolicy, library: &ContentLibrary, config: &NetworkConfig) -> Result<f64> {
    if policy.len() != library.len() {
        return Err(Error::InvalidArgument("policy does not match the library".into()));
    }
    let c = coverage_coefficient(config, config.d_l);
    Ok(library
        .popularity()
        .iter()
        .zip(policy.q())
        .map(|(b, &q)| b * (1.0 - q) * -(-c * q).exp_m1())
        .sum())
}

pub fn search_radius(d_hat_l: f64, d_hat_n: f64, config: &NetworkConfig) -> f64 {
    d_hat_l.min(d_hat_n.max(config.d_l)).min(config.d_r)
}

pub fn association_thresholds(
    policy: &CachingPolicy,
    constants: &DerivedConstants,
    library: &ContentLibrary,
    config: &NetworkConfig,
) -> Result<AssociationThresholds> {
    if constants.d2d_thresholds.len() != library.len() {
        return Err(Error::InvalidArgument("thresholds do not match the library".into()));
    }
    let gamma = gamma_los_d2d(policy, library, config)?;
    let gain_sq = config.g_m * config.g_m;
    let disturbance = gamma * constants.i_bar + constants.n_hat;
    let d_hat_l: Vec<f64> = constants
        .d2d_thresholds
        .iter()
        .map(|&t| qos_distance(gain_sq, t, disturbance, config.alpha_l))
        .collect();
    let d_hat_n: Vec<f64> = constants
        .d2d_thresholds
        .iter()
        .map(|&t| qos_distance(gain_sq, t, disturbance, config.alpha_n))
        .collect();
    let d_iu = d_hat_l
        .iter()
        .zip(&d_hat_n)
        .map(|(&l, &n)| search_radius(l, n, config))
        .collect();
    Ok(AssociationThresholds {
        gamma,
        d_hat_l,
        d_hat_n,
        d_iu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeliveryMode {
    SelfCache,
    D2dLos,
    D2dNlos,
    CellularFronthaul,
    CellularBackhaul,
}

impl DeliveryMode {
    pub fn is_d2d(self) -> bool {
        matches!(self, DeliveryMode::D2dLos | DeliveryMode::D2dNlos)
    }

    pub fn is_cellular(self) -> bool {
        matches!(self, DeliveryMode::CellularFronthaul | DeliveryMode::CellularBackhaul)
    }

    /// Served without touching the cellular tier.
    pub fn is_offloaded(self) -> bool {
        !self.is_cellular()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryDecision {
    pub mode: DeliveryMode,
    /// Distance to the serving D2D transmitter.
    pub server_distance: Option<f64>,
    /// Index of the serving neighbour in the candidate list.
    pub server: Option<usize>,
    /// Zero-based file index (popularity rank − 1).
    pub file: usize,
}

/// Fixed-capacity set of file indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileSet {
    words: Vec<u64>,
}

impl FileSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, file: usize) {
        let (w, b) = (file / 64, file % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << b;
    }

    pub fn contains(&self, file: usize) -> bool {
        self.words.get(file / 64).is_some_and(|w| w & (1 << (file % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b))
    }
}

impl FromIterator<usize> for FileSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = FileSet::new();
        for f in iter {
            set.insert(f);
        }
        set
    }
}

/// Core of the association rule once the nearest cacher of the file is known.
///
/// `nearest` is `(neighbour index, distance)` of the closest device holding
/// the file. A cacher within `radius` serves the request, LoS inside the
/// LoS ball and NLoS beyond it.
pub fn decide(
    file: usize,
    self_hit: bool,
    nearest: Option<(usize, f64)>,
    in_edge_cloud: bool,
    radius: f64,
    config: &NetworkConfig,
) -> DeliveryDecision {
    if self_hit {
        return DeliveryDecision {
            mode: DeliveryMode::SelfCache,
            server_distance: None,
            server: None,
            file,
        };
    }
    if let Some((idx, r)) = nearest.filter(|&(_, r)| r <= radius) {
        let mode = if r <= config.d_l {
            DeliveryMode::D2dLos
        } else {
            DeliveryMode::D2dNlos
        };
        return DeliveryDecision {
            mode,
            server_distance: Some(r),
            server: Some(idx),
            file,
        };
    }
    DeliveryDecision {
        mode: if in_edge_cloud {
            DeliveryMode::CellularFronthaul
        } else {
            DeliveryMode::CellularBackhaul
        },
        server_distance: None,
        server: None,
        file,
    }
}

/// Resolves one request. `neighbors` holds `(distance, cache)` for every
/// candidate D2D transmitter; `search_radii[i]` is D_{i,u} for the proposed
/// scheme, or D_R for every file under the discovery-radius baseline.
/// Equidistant cachers resolve to the lowest index.
pub fn associate(
    file: usize,
    self_cache: &FileSet,
    neighbors: &[(f64, FileSet)],
    edge_cloud: &FileSet,
    search_radii: &[f64],
    config: &NetworkConfig,
) -> Result<DeliveryDecision> {
    let radius = *search_radii.get(file).ok_or_else(|| {
        Error::InvalidArgument(alloc::format!(
            "file index {file} outside a library of {} files",
            search_radii.len()
        ))
    })?;
    let mut nearest: Option<(usize, f64)> = None;
    for (idx, (d, cache)) in neighbors.iter().enumerate() {
        if cache.contains(file) && nearest.is_none_or(|(_, best)| *d < best) {
            nearest = Some((idx, *d));
        }
    }
    Ok(decide(
        file,
        self_cache.contains(file),
        nearest,
        edge_cloud.contains(file),
        radius,
        config,
    ))
}
