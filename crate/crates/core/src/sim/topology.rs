//! Network realizations: RRH and MU point processes, activity flags and
//! hashed Bernoulli cache contents.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::seed::{splitmix64, unit_interval};
use crate::association::FileSet;
use crate::error::{Error, Result};
use crate::model::NetworkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn distance(self, other: Point) -> f64 {
        ((self.x - other.x) * (self.x - other.x) + (self.y - other.y) * (self.y - other.y)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobileUser {
    pub position: Point,
    pub active: bool,
}

/// One realization. User 0 is the typical user at the origin; it is always
/// active.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub rrhs: Vec<Point>,
    pub users: Vec<MobileUser>,
    /// Radius of the disk holding `rrhs`.
    pub rrh_window: f64,
    /// Radius of the disk holding `users`.
    pub user_window: f64,
    pub seed: u64,
}

impl Topology {
    pub fn typical(&self) -> &MobileUser {
        &self.users[0]
    }
}

/// Draws a Poisson number of points uniformly in the disk of `radius`.
pub(crate) fn poisson_disk<R: Rng>(rng: &mut R, density: f64, radius: f64) -> Vec<Point> {
    let mean = density * PI * radius * radius;
    let count = if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    (0..count).map(|_| uniform_in_disk(rng, radius)).collect()
}

fn uniform_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point::new(r * theta.cos(), r * theta.sin())
}

/// Samples RRHs in the `sim_radius` disk and MUs in the disk of radius
/// `mu_radius + D_R` (capped at `sim_radius`); the typical MU is inserted at
/// the origin.
pub fn generate_topology(config: &NetworkConfig, seed: u64) -> Result<Topology> {
    config.validate()?;
    if !(config.sim_radius > config.d_r + config.d_l) {
        return Err(Error::config(
            "sim_radius",
            alloc::format!(
                "window of {} m must exceed D_R + D_L = {} m",
                config.sim_radius,
                config.d_r + config.d_l
            ),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rrhs = poisson_disk(&mut rng, config.lambda_r, config.sim_radius);
    let user_window = (config.mu_radius + config.d_r).min(config.sim_radius);
    let mut users = Vec::new();
    users.push(MobileUser {
        position: Point::ORIGIN,
        active: true,
    });
    for position in poisson_disk(&mut rng, config.lambda_u, user_window) {
        let active = rng.random::<f64>() < config.rho;
        users.push(MobileUser { position, active });
    }
    Ok(Topology {
        rrhs,
        users,
        rrh_window: config.sim_radius,
        user_window,
        seed,
    })
}

/// Independent Bernoulli(q_i) cache contents for every (user, file) pair,
/// evaluated on demand from a keyed hash, so that only the entries actually
/// inspected are ever computed.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheAssignment {
    key: u64,
    q: Vec<f64>,
}

impl CacheAssignment {
    pub fn contains(&self, user: usize, file: usize) -> bool {
        let q = self.q[file];
        if q >= 1.0 {
            return true;
        }
        if q <= 0.0 {
            return false;
        }
        let h = splitmix64(self.key ^ splitmix64(((user as u64) << 20) | file as u64));
        unit_interval(h) < q
    }

    pub fn file_set(&self, user: usize) -> FileSet {
        (0..self.q.len()).filter(|&f| self.contains(user, f)).collect()
    }

    pub fn num_files(&self) -> usize {
        self.q.len()
    }
}

/// Cache contents for every MU of `topology` under placement `q`.
pub fn assign_caches(topology: &Topology, q: &[f64], seed: u64) -> Result<CacheAssignment> {
    if let Some(x) = q.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidArgument(alloc::format!("caching probability {x} outside [0, 1]")));
    }
    if q.len() >= 1 << 20 || topology.users.len() >= 1 << 40 {
        return Err(Error::InvalidArgument("library or population too large for cache hashing".into()));
    }
    Ok(CacheAssignment {
        key: splitmix64(seed),
        q: q.to_vec(),
    })
}

/// Bucket grid over the inactive MUs for radius queries.
#[derive(Debug, Clone)]
pub(crate) struct UserGrid {
    cell: f64,
    origin: f64,
    dim: usize,
    buckets: Vec<Vec<u32>>,
}

impl UserGrid {
    pub fn inactive(topology: &Topology, cell: f64) -> Self {
        let span = 2.0 * topology.user_window;
        let dim = ((span / cell).ceil() as usize).clamp(1, 512);
        let cell = span / dim as f64;
        let mut grid = Self {
            cell,
            origin: -topology.user_window,
            dim,
            buckets: alloc::vec![Vec::new(); dim * dim],
        };
        for (idx, u) in topology.users.iter().enumerate() {
            if !u.active {
                let (cx, cy) = (grid.coord(u.position.x), grid.coord(u.position.y));
                grid.buckets[cy * dim + cx].push(idx as u32);
            }
        }
        grid
    }

    fn coord(&self, v: f64) -> usize {
        (((v - self.origin) / self.cell).floor().max(0.0) as usize).min(self.dim - 1)
    }

    /// Closest inactive MU within `radius` of `at` holding `file`; ties go to
    /// the lowest user index.
    pub fn nearest_cacher(
        &self,
        topology: &Topology,
        caches: &CacheAssignment,
        at: Point,
        file: usize,
        radius: f64,
    ) -> Option<(usize, f64)> {
        if !(radius > 0.0) {
            return None;
        }
        let (x0, x1) = (self.coord(at.x - radius), self.coord(at.x + radius));
        let (y0, y1) = (self.coord(at.y - radius), self.coord(at.y + radius));
        let r2 = radius * radius;
        let mut best: Option<(usize, f64)> = None;
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &idx in &self.buckets[cy * self.dim + cx] {
                    let idx = idx as usize;
                    let p = topology.users[idx].position;
                    let d2 = (p.x - at.x) * (p.x - at.x) + (p.y - at.y) * (p.y - at.y);
                    let better = match best {
                        None => true,
                        Some((bi, bd)) => d2 < bd || (d2 == bd && idx < bi),
                    };
                    if d2 <= r2 && better && caches.contains(idx, file) {
                        best = Some((idx, d2));
                    }
                }
            }
        }
        best.map(|(idx, d2)| (idx, d2.sqrt()))
    }
}
