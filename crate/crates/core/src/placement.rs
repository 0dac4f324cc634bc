//! Probabilistic content placement.
//!
//! The proposed policy maximizes the approximated average successful LoS
//! reception probability Σ β_i (1 − exp(−c_i q_i)), c_i = πλ_u(1−ρ)D_{i,c}²,
//! subject to 0 ≤ q_i ≤ 1 and Σ q_i ≤ M_d. Both it and the hit-maximizing
//! baseline are separable and concave, so the KKT point is found by
//! bisecting on the multiplier of the storage constraint.

use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{ContentLibrary, DerivedConstants, NetworkConfig};

/// Tolerance on Σ q_i − M_d used when no explicit tolerance is given.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

const MAX_BISECTIONS: usize = 200;
const MAX_EXPANSIONS: usize = 64;
// ln(1e-300): lower end of the initial multiplier bracket.
const LN_MU_FLOOR: f64 = -690.775_527_898_213_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    AslpOptimal,
    HitMaxBaseline,
    Custom,
}

/// Per-file caching probabilities q.
#[derive(Debug, Clone, PartialEq)]
pub struct CachingPolicy {
    q: Vec<f64>,
    pub kind: PolicyKind,
    /// Optimal Lagrange multiplier (optimized policies only). Zero when the
    /// storage constraint is slack.
    pub mu_star: Option<f64>,
    /// Bisection steps spent locating the multiplier.
    pub iterations: usize,
}

impl CachingPolicy {
    /// User-supplied policy, checked against the box and storage constraints.
    pub fn custom(q: Vec<f64>, library: &ContentLibrary) -> Result<Self> {
        if q.len() != library.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "policy has {} entries for a library of {} files",
                q.len(),
                library.len()
            )));
        }
        if let Some(x) = q.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidArgument(alloc::format!("caching probability {x} outside [0, 1]")));
        }
        let total: f64 = q.iter().sum();
        if total > library.m_d as f64 + 1e-9 {
            return Err(Error::InvalidArgument(alloc::format!(
                "expected cache occupancy {total} exceeds M_d = {}",
                library.m_d
            )));
        }
        Ok(Self {
            q,
            kind: PolicyKind::Custom,
            mu_star: None,
            iterations: 0,
        })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Expected number of cached files per device.
    pub fn occupancy(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// QoS distances used by the placement problem.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementGeometry {
    /// D̂_i: largest LoS distance meeting T_i under worst-case mean interference.
    pub d_hat: Vec<f64>,
    /// D_{i,c} = min(D̂_i, D_L, D_R).
    pub d_ic: Vec<f64>,
}

/// Largest link length r with `gain_sq · r^{-alpha} ≥ threshold · disturbance`.
/// Infinite for a zero threshold.
pub fn qos_distance(gain_sq: f64, threshold: f64, disturbance: f64, alpha: f64) -> f64 {
    if threshold <= 0.0 {
        return f64::INFINITY;
    }
    (gain_sq / (threshold * disturbance)).powf(1.0 / alpha)
}

pub fn placement_distances(
    constants: &DerivedConstants,
    config: &NetworkConfig,
    library: &ContentLibrary,
) -> Result<PlacementGeometry> {
    if constants.d2d_thresholds.len() != library.len() {
        return Err(Error::InvalidArgument("thresholds do not match the library".into()));
    }
    let gain_sq = config.g_m * config.g_m;
    let disturbance = constants.i_bar + constants.n_hat;
    let cap = config.d_l.min(config.d_r);
    let d_hat: Vec<f64> = constants
        .d2d_thresholds
        .iter()
        .map(|&t| qos_distance(gain_sq, t, disturbance, config.alpha_l))
        .collect();
    let d_ic = d_hat.iter().map(|&d| d.min(cap)).collect();
    Ok(PlacementGeometry { d_hat, d_ic })
}

/// c = πλ_u(1−ρ)d²: log-void-probability of cachers within distance d per unit q.
#[inline]
pub(crate) fn coverage_coefficient(config: &NetworkConfig, distance: f64) -> f64 {
    PI * config.idle_density() * distance * distance
}

/// SLP_i = 1 − exp(−πλ_u(1−ρ) q_i D_{i,c}²).
pub fn slp_closed_form(q_i: f64, d_ic: f64, config: &NetworkConfig) -> f64 {
    -(-coverage_coefficient(config, d_ic) * q_i).exp_m1()
}

pub fn aslp(q: &[f64], geometry: &PlacementGeometry, library: &ContentLibrary, config: &NetworkConfig) -> Result<f64> {
    if q.len() != library.len() || geometry.d_ic.len() != library.len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "dimension mismatch: q has {}, geometry {}, library {}",
            q.len(),
            geometry.d_ic.len(),
            library.len()
        )));
    }
    Ok(library
        .popularity()
        .iter()
        .zip(q)
        .zip(&geometry.d_ic)
        .map(|((b, &qi), &d)| b * slp_closed_form(qi, d, config))
        .sum())
}

/// Cache-hit probability maximized by the baseline: a request is a hit if the
/// file is in the device's own cache or at any cacher within D_R.
pub fn hit_probability(q: &[f64], library: &ContentLibrary, config: &NetworkConfig) -> Result<f64> {
    if q.len() != library.len() {
        return Err(Error::InvalidArgument("policy does not match the library".into()));
    }
    let c = coverage_coefficient(config, config.d_r);
    Ok(library
        .popularity()
        .iter()
        .zip(q)
        .map(|(b, &qi)| b * (1.0 - (1.0 - qi) * (-c * qi).exp()))
        .sum())
}

fn aslp_response(beta: f64, c: f64, ln_mu: f64) -> f64 {
    if c <= 0.0 || beta <= 0.0 {
        return 0.0;
    }
    (((beta * c).ln() - ln_mu) / c).clamp(0.0, 1.0)
}

/// Unclamped-then-clamped KKT solution q_i(μ) of the LoS-success objective.
pub fn q_of_mu(mu: f64, geometry: &PlacementGeometry, library: &ContentLibrary, config: &NetworkConfig) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("multiplier must be positive, got {mu}")));
    }
    if geometry.d_ic.len() != library.len() {
        return Err(Error::InvalidArgument("geometry does not match the library".into()));
    }
    let ln_mu = mu.ln();
    Ok(library
        .popularity()
        .iter()
        .zip(&geometry.d_ic)
        .map(|(&b, &d)| aslp_response(b, coverage_coefficient(config, d), ln_mu))
        .collect())
}

struct WaterFill {
    q: Vec<f64>,
    ln_mu: f64,
    iterations: usize,
}

/// Finds ln μ with Σ_i response(i, ln μ) = budget, each response being
/// nonincreasing in ln μ. `ln_mu_max` must zero every response.
fn water_fill<F>(n: usize, budget: f64, tol: f64, ln_mu_max: f64, response: F) -> Result<WaterFill>
where
    F: Fn(usize, f64) -> f64,
{
    let fill = |ln_mu: f64| -> Vec<f64> { (0..n).map(|i| response(i, ln_mu)).collect() };
    let total = |ln_mu: f64| -> f64 { (0..n).map(|i| response(i, ln_mu)).sum() };

    if budget <= 0.0 {
        return Ok(WaterFill {
            q: alloc::vec![0.0; n],
            ln_mu: ln_mu_max,
            iterations: 0,
        });
    }
    // Storage constraint slack: everything that can be cached is cached in full.
    let saturated = fill(f64::NEG_INFINITY);
    if saturated.iter().sum::<f64>() <= budget + tol {
        return Ok(WaterFill {
            q: saturated,
            ln_mu: f64::NEG_INFINITY,
            iterations: 0,
        });
    }

    let mut hi = ln_mu_max;
    let mut lo = LN_MU_FLOOR.min(hi - 1.0);
    let mut expansions = 0;
    while total(lo) < budget - tol {
        if expansions == MAX_EXPANSIONS {
            return Err(Error::Bracket(alloc::format!(
                "Σq stays below {budget} down to ln μ = {lo}"
            )));
        }
        lo = hi - 2.0 * (hi - lo);
        expansions += 1;
    }
    while total(hi) > budget + tol {
        if expansions == MAX_EXPANSIONS {
            return Err(Error::Bracket(alloc::format!(
                "Σq stays above {budget} up to ln μ = {hi}"
            )));
        }
        hi = lo + 2.0 * (hi - lo);
        expansions += 1;
    }

    let mut iterations = 0;
    let mut ln_mu = 0.5 * (lo + hi);
    while iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        iterations += 1;
        ln_mu = mid;
        let s = total(mid);
        if (s - budget).abs() <= tol {
            break;
        }
        if s > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(WaterFill {
        q: fill(ln_mu),
        ln_mu,
        iterations,
    })
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("tolerance must be positive, got {tol}")))
    }
}

/// QoS-aware placement: maximizes ASLP under the average storage constraint.
pub fn optimize_caching(
    geometry: &PlacementGeometry,
    library: &ContentLibrary,
    config: &NetworkConfig,
    tol: f64,
) -> Result<CachingPolicy> {
    check_tolerance(tol)?;
    if geometry.d_ic.len() != library.len() {
        return Err(Error::InvalidArgument("geometry does not match the library".into()));
    }
    let beta = library.popularity();
    let coeffs: Vec<f64> = geometry.d_ic.iter().map(|&d| coverage_coefficient(config, d)).collect();
    // Files with D_{i,c} = 0 have zero SLP whatever q_i is; they drop out.
    let ln_mu_max = beta
        .iter()
        .zip(&coeffs)
        .filter(|(b, c)| **b > 0.0 && **c > 0.0)
        .map(|(b, c)| (b * c).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let budget = library.m_d as f64;
    if ln_mu_max == f64::NEG_INFINITY {
        return Ok(CachingPolicy {
            q: alloc::vec![0.0; library.len()],
            kind: PolicyKind::AslpOptimal,
            mu_star: Some(0.0),
            iterations: 0,
        });
    }
    let sol = water_fill(library.len(), budget, tol, ln_mu_max, |i, ln_mu| {
        aslp_response(beta[i], coeffs[i], ln_mu)
    })?;
    Ok(CachingPolicy {
        q: sol.q,
        kind: PolicyKind::AslpOptimal,
        mu_star: Some(sol.ln_mu.exp()),
        iterations: sol.iterations,
    })
}

/// Solves β e^{−cq}(1 + c − cq) = μ for q ∈ [0, 1] (clamped).
fn hit_response(beta: f64, c: f64, ln_mu: f64) -> f64 {
    if beta <= 0.0 {
        return 0.0;
    }
    let ln_beta = beta.ln();
    let marginal = |q: f64| ln_beta - c * q + (1.0 + c - c * q).ln();
    if ln_mu >= marginal(0.0) {
        return 0.0;
    }
    if ln_mu <= marginal(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if marginal(mid) > ln_mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Baseline placement maximizing the cache-hit probability within D_R.
pub fn baseline_hitmax_caching(library: &ContentLibrary, config: &NetworkConfig) -> Result<CachingPolicy> {
    baseline_hitmax_caching_with_tol(library, config, DEFAULT_TOLERANCE)
}

pub fn baseline_hitmax_caching_with_tol(
    library: &ContentLibrary,
    config: &NetworkConfig,
    tol: f64,
) -> Result<CachingPolicy> {
    check_tolerance(tol)?;
    let beta = library.popularity();
    let c = coverage_coefficient(config, config.d_r);
    let n = library.len();
    if c <= 0.0 {
        // No neighbours: the hit probability is Σ β_i q_i, maximized by
        // caching the M_d most popular files.
        let q = (0..n).map(|i| if i < library.m_d { 1.0 } else { 0.0 }).collect();
        return Ok(CachingPolicy {
            q,
            kind: PolicyKind::HitMaxBaseline,
            mu_star: None,
            iterations: 0,
        });
    }
    let ln_mu_max = beta
        .iter()
        .filter(|b| **b > 0.0)
        .map(|b| b.ln() + (1.0 + c).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let sol = water_fill(n, library.m_d as f64, tol, ln_mu_max, |i, ln_mu| {
        hit_response(beta[i], c, ln_mu)
    })?;
    Ok(CachingPolicy {
        q: sol.q,
        kind: PolicyKind::HitMaxBaseline,
        mu_star: Some(sol.ln_mu.exp()),
        iterations: sol.iterations,
    })
}
