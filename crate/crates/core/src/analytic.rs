//! Performance analysis by numerical quadrature: Laplace transforms of the
//! D2D and cellular interference, per-file success probabilities over each
//! tier and the aggregate success / offloading probabilities.
//!
//! Interference fields are PPPs with Rayleigh fading; the D2D interferers
//! form a thinned PPP of intensity ρλ_u p_d with i.i.d. antenna gains G′.

use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{ContentLibrary, DerivedConstants, GainPmf, NetworkConfig};
use crate::quad::Quadrature;

/// Which integrand the D2D interference Laplace transform uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplaceIntegrand {
    /// 1 − 1/(1 + G′ S y^{-α} / G_m²): interference normalized by the
    /// desired-link gain, so L(0) = 1.
    #[default]
    Corrected,
    /// 1 − G_m²/(1 + G′ S y^{-α}), taken literally. Its tail tends to
    /// 1 − G_m² and the transform only exists for G_m = 1.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalyticOptions {
    pub integrand: LaplaceIntegrand,
    pub quadrature: Quadrature,
}

impl AnalyticOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            quadrature: Quadrature::with_rel_tol(rel_tol),
            ..Self::default()
        }
    }
}

/// p_s = Σ β_i q_i.
pub fn self_hit_prob(q: &[f64], library: &ContentLibrary) -> Result<f64> {
    check_len(q.len(), library)?;
    Ok(library.popularity().iter().zip(q).map(|(b, q)| b * q).sum())
}

/// p_d = Σ β_i (1 − q_i)(1 − exp(−πλ_u(1−ρ) q_i D_{i,u}²)).
pub fn d2d_delivery_prob(q: &[f64], search_radii: &[f64], library: &ContentLibrary, config: &NetworkConfig) -> Result<f64> {
    check_len(q.len(), library)?;
    check_len(search_radii.len(), library)?;
    Ok(library
        .popularity()
        .iter()
        .zip(q)
        .zip(search_radii)
        .map(|((b, &qi), &r)| b * (1.0 - qi) * (1.0 - void_probability(config, qi, r)))
        .sum())
}

fn check_len(len: usize, library: &ContentLibrary) -> Result<()> {
    if len == library.len() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!(
            "expected {} per-file values, got {len}",
            library.len()
        )))
    }
}

/// Probability that no device caching a file with probability `q` lies
/// within `radius`.
fn void_probability(config: &NetworkConfig, q: f64, radius: f64) -> f64 {
    (-PI * config.idle_density() * q * radius * radius).exp()
}

/// ∫_a^∞ s·y/(y^α + s) dy, i.e. the radial integral of 1 − 1/(1 + s y^{-α}).
fn rayleigh_tail(quad: &Quadrature, s: f64, alpha: f64, a: f64) -> Result<f64> {
    let f = move |y: f64| s * y.powf(1.0 - alpha) / (1.0 + s * y.powf(-alpha));
    let knee = s.powf(1.0 / alpha);
    if knee > a {
        let head = quad.integrate(|y| s * y / (y.powf(alpha) + s), a, knee)?;
        Ok(head + quad.integrate_power_tail(f, knee, alpha - 1.0)?)
    } else {
        quad.integrate_power_tail(f, a, alpha - 1.0)
    }
}

/// ∫_a^b s·y/(y^α + s) dy.
fn rayleigh_segment(quad: &Quadrature, s: f64, alpha: f64, a: f64, b: f64) -> Result<f64> {
    let knee = s.powf(1.0 / alpha);
    let f = |y: f64| s * y / (y.powf(alpha) + s);
    if knee > a && knee < b {
        quad.integrate_with_breaks(f, &[a, knee, b])
    } else {
        quad.integrate(f, a, b)
    }
}

/// L_Î(S): Laplace transform of the normalized D2D interference at the
/// typical user, interferers at intensity ρλ_u p_d.
pub fn laplace_d2d_interference(
    s: f64,
    p_d: f64,
    config: &NetworkConfig,
    gains: &GainPmf,
    options: &AnalyticOptions,
) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("transform argument must be ≥ 0, got {s}")));
    }
    if !(0.0..=1.0).contains(&p_d) {
        return Err(Error::InvalidArgument(alloc::format!("p_d must lie in [0, 1], got {p_d}")));
    }
    let intensity = config.rho * config.lambda_u * p_d;
    if intensity == 0.0 {
        return Ok(1.0);
    }
    Ok((-2.0 * PI * intensity * d2d_radial_expectation(s, config, gains, options)?).exp())
}

/// E_{G′}[∫_0^∞ (1 − E_h[e^{−…}]) y dy] for the chosen integrand.
fn d2d_radial_expectation(s: f64, config: &NetworkConfig, gains: &GainPmf, options: &AnalyticOptions) -> Result<f64> {
    let quad = &options.quadrature;
    let gm2 = config.g_m * config.g_m;
    let mut total = 0.0;
    for (g, p) in gains.iter().filter(|(_, p)| *p > 0.0) {
        let value = match options.integrand {
            LaplaceIntegrand::Corrected => {
                let s_eff = g * s / gm2;
                if s_eff == 0.0 {
                    0.0
                } else {
                    rayleigh_segment(quad, s_eff, config.alpha_l, 0.0, config.d_l)?
                        + rayleigh_tail(quad, s_eff, config.alpha_n, config.d_l)?
                }
            }
            LaplaceIntegrand::AsPrinted => {
                let limit = 1.0 - gm2;
                if limit.abs() > 1e-12 {
                    return Err(Error::DivergentIntegral(alloc::format!(
                        "printed D2D Laplace integrand tends to 1 − G_m² = {limit:.6} as y → ∞"
                    )));
                }
                // G_m = 1: both forms coincide.
                let s_eff = g * s;
                let los = quad.integrate(|y| (1.0 - gm2 / (1.0 + s_eff * y.powf(-config.alpha_l))) * y, 0.0, config.d_l)?;
                los + rayleigh_tail(quad, s_eff, config.alpha_n, config.d_l)?
            }
        };
        total += p * value;
    }
    Ok(total)
}

/// L_Î_c(S) for a user served by an RRH at distance `x`; all farther RRHs interfere.
pub fn laplace_cellular_interference(s: f64, x: f64, config: &NetworkConfig, options: &AnalyticOptions) -> Result<f64> {
    if !(s >= 0.0 && x >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "need S ≥ 0 and x ≥ 0, got S = {s}, x = {x}"
        )));
    }
    if s == 0.0 || config.lambda_r == 0.0 {
        return Ok(1.0);
    }
    let integral = rayleigh_tail(&options.quadrature, s, config.alpha_c, x)?;
    Ok((-2.0 * PI * config.lambda_r * integral).exp())
}

/// Pr[SINR_c ≥ T_i^c] for a user attached to its nearest RRH.
pub fn cellular_success_prob(
    file: usize,
    config: &NetworkConfig,
    constants: &DerivedConstants,
    options: &AnalyticOptions,
) -> Result<f64> {
    let t = *constants
        .cellular_thresholds
        .get(file)
        .ok_or_else(|| Error::InvalidArgument(alloc::format!("no file with index {file}")))?;
    cellular_success_for_threshold(t, config, constants.n_hat_c, options)
}

fn cellular_success_for_threshold(t: f64, config: &NetworkConfig, n_hat_c: f64, options: &AnalyticOptions) -> Result<f64> {
    let lambda = config.lambda_r;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let alpha = config.alpha_c;
    let z_max = (40.0 / (PI * lambda)).sqrt();
    let integrand = |z: f64| -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let s = t * z.powf(alpha);
        let noise = (-n_hat_c * s).exp();
        let pdf = 2.0 * PI * lambda * z * (-PI * lambda * z * z).exp();
        if noise == 0.0 || pdf == 0.0 {
            return 0.0;
        }
        // Quadrature failures inside the integrand surface as NaN and are
        // reported by the outer integration.
        match laplace_cellular_interference(s, z, config, options) {
            Ok(l) => l * noise * pdf,
            Err(_) => f64::NAN,
        }
    };
    options.quadrature.integrate_with_breaks(integrand, &scale_breaks(z_max))
}

/// [0, 1e-6·z, …, 1e-1·z, z]: lets the adaptive rule find mass squeezed
/// against the origin by very large thresholds.
fn scale_breaks(z_max: f64) -> [f64; 8] {
    [0.0, 1e-6 * z_max, 1e-5 * z_max, 1e-4 * z_max, 1e-3 * z_max, 1e-2 * z_max, 1e-1 * z_max, z_max]
}

/// Pr[SINR_d ≥ T_i ∩ r ≤ D_{i,u}] for the nearest device caching file i,
/// split into its LoS part on [0, min(D_L, D_{i,u})] and NLoS part on
/// [D_L, max(D_L, D_{i,u})].
pub fn d2d_success_prob(
    file: usize,
    q: &[f64],
    search_radii: &[f64],
    p_d: f64,
    config: &NetworkConfig,
    constants: &DerivedConstants,
    options: &AnalyticOptions,
) -> Result<f64> {
    let (Some(&qi), Some(&radius), Some(&t)) = (q.get(file), search_radii.get(file), constants.d2d_thresholds.get(file)) else {
        return Err(Error::InvalidArgument(alloc::format!("no file with index {file}")));
    };
    let lambda = config.idle_density() * qi;
    if lambda == 0.0 || radius <= 0.0 {
        return Ok(0.0);
    }
    let noise = constants.n_hat / (config.g_m * config.g_m);
    let quad = &options.quadrature;
    let pdf = move |z: f64| 2.0 * PI * lambda * z * (-PI * lambda * z * z).exp();
    let piece = |alpha: f64, a: f64, b: f64| -> Result<f64> {
        quad.integrate(
            |z: f64| {
                let s = t * z.powf(alpha);
                match laplace_d2d_interference(s, p_d, config, &constants.gain_pmf, options) {
                    Ok(l) => l * (-noise * s).exp() * pdf(z),
                    Err(_) => f64::NAN,
                }
            },
            a,
            b,
        )
    };
    // Surface integrand errors (e.g. the divergent printed transform) directly.
    laplace_d2d_interference(t, p_d, config, &constants.gain_pmf, options)?;

    let los_end = config.d_l.min(radius);
    let nlos_end = config.d_l.max(radius);
    let mut total = piece(config.alpha_l, 0.0, los_end)?;
    if nlos_end > config.d_l {
        total += piece(config.alpha_n, config.d_l, nlos_end)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Per-file terms of the analytic report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FileTerms {
    pub beta: f64,
    pub q: f64,
    /// 1 − exp(−πλ_u(1−ρ)q_i D_{i,u}²)
    pub d2d_coverage: f64,
    /// Pr[SINR_d ≥ T_i ∩ r ≤ D_{i,u}]
    pub d2d_success: f64,
    /// Pr[SINR_c ≥ T_i]
    pub cellular_success: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub p_s: f64,
    pub p_d: f64,
    /// Offloading probability p_s + p_d.
    pub op: f64,
    pub sp_d2d: f64,
    pub sp_cell: f64,
    pub sp_total: f64,
    pub per_file: Vec<FileTerms>,
}

/// Success and offloading probabilities of a (placement, search radius) design.
pub fn overall_report(
    q: &[f64],
    search_radii: &[f64],
    config: &NetworkConfig,
    library: &ContentLibrary,
    constants: &DerivedConstants,
    options: &AnalyticOptions,
) -> Result<AnalyticReport> {
    check_len(q.len(), library)?;
    check_len(search_radii.len(), library)?;
    let p_s = self_hit_prob(q, library)?;
    let p_d = d2d_delivery_prob(q, search_radii, library, config)?;

    let mut cellular_cache: Vec<(f64, f64)> = Vec::new();
    let mut per_file = Vec::with_capacity(library.len());
    let (mut sp_d2d, mut sp_cell) = (0.0, 0.0);
    for (i, (&beta, &qi)) in library.popularity().iter().zip(q).enumerate() {
        let t_c = constants.cellular_thresholds[i];
        let cellular_success = match cellular_cache.iter().find(|(t, _)| *t == t_c) {
            Some(&(_, v)) => v,
            None => {
                let v = cellular_success_for_threshold(t_c, config, constants.n_hat_c, options)?;
                cellular_cache.push((t_c, v));
                v
            }
        };
        let void = void_probability(config, qi, search_radii[i]);
        let d2d_success = if qi > 0.0 {
            d2d_success_prob(i, q, search_radii, p_d, config, constants, options)?
        } else {
            0.0
        };
        let miss = beta * (1.0 - qi);
        sp_d2d += miss * d2d_success;
        sp_cell += miss * void * cellular_success;
        per_file.push(FileTerms {
            beta,
            q: qi,
            d2d_coverage: 1.0 - void,
            d2d_success,
            cellular_success,
        });
    }
    Ok(AnalyticReport {
        p_s,
        p_d,
        op: p_s + p_d,
        sp_d2d,
        sp_cell,
        sp_total: p_s + sp_d2d + sp_cell,
        per_file,
    })
}
