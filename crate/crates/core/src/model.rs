//! Network, channel and content model: configuration, Zipf popularity,
//! per-file SINR thresholds, the interferer antenna-gain distribution and the
//! effective noise / worst-case interference constants derived from them.

use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10.0.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Converts a power (or power density) in dBm to W.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10.0.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Physical and topological parameters. Everything is linear / SI:
/// densities in 1/m², powers in W, frequencies and bandwidths in Hz,
/// distances in m, angles in rad, noise density in W/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// RRH density.
    pub lambda_r: f64,
    /// Mobile-user density.
    pub lambda_u: f64,
    /// Probability that a mobile user is requesting content.
    pub rho: f64,
    /// RRH transmit power.
    pub p_c: f64,
    /// Device (D2D) transmit power.
    pub p_d: f64,
    /// Extra power spent when a file has to be fetched over the backhaul.
    pub p_b: f64,
    pub f_c_cell: f64,
    pub f_c_mm: f64,
    pub b_c: f64,
    pub b_d: f64,
    pub alpha_c: f64,
    pub alpha_l: f64,
    pub alpha_n: f64,
    /// LoS-ball radius.
    pub d_l: f64,
    /// Maximum D2D discovery distance.
    pub d_r: f64,
    /// Main-lobe gain of the device antenna.
    pub g_m: f64,
    /// Side-lobe gain of the device antenna.
    pub g_s: f64,
    /// Main-lobe beamwidth.
    pub delta_theta: f64,
    pub g_t: f64,
    pub g_r: f64,
    /// Noise power spectral density.
    pub n_o: f64,
    /// Receiver noise figure.
    pub f_n: f64,
    /// Radius of the RRH window used by the simulator.
    pub sim_radius: f64,
    /// Radius of the disk around the typical user whose active MUs issue
    /// requests in the simulator (their D2D servers are the interferers).
    pub mu_radius: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl NetworkConfig {
    /// Reference scenario: λ_u = 500/km², D_L = 75 m and the usual
    /// 28 GHz / sub-6 GHz C-RAN parameters. The -178 noise density is read
    /// as dBm/Hz, the beamwidth is 30° and the cellular antennas are 0 dB.
    pub fn reference() -> Self {
        Self {
            lambda_r: 10e-6,
            lambda_u: 500e-6,
            rho: 0.5,
            p_c: 0.1,
            p_d: 0.002,
            p_b: 1.0,
            f_c_cell: 1e9,
            f_c_mm: 28e9,
            b_c: 20e6,
            b_d: 1e9,
            alpha_c: 2.5,
            alpha_l: 2.1,
            alpha_n: 4.0,
            d_l: 75.0,
            d_r: 150.0,
            g_m: db_to_linear(9.0),
            g_s: db_to_linear(-9.0),
            delta_theta: PI / 6.0,
            g_t: 1.0,
            g_r: 1.0,
            n_o: dbm_to_watts(-178.0),
            f_n: db_to_linear(10.0),
            sim_radius: 2000.0,
            mu_radius: 300.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 18] = [
            ("lambda_r", self.lambda_r),
            ("lambda_u", self.lambda_u),
            ("p_c", self.p_c),
            ("p_d", self.p_d),
            ("p_b", self.p_b),
            ("f_c_cell", self.f_c_cell),
            ("f_c_mm", self.f_c_mm),
            ("b_c", self.b_c),
            ("b_d", self.b_d),
            ("d_l", self.d_l),
            ("d_r", self.d_r),
            ("g_m", self.g_m),
            ("g_s", self.g_s),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("n_o", self.n_o),
            ("f_n", self.f_n),
            ("sim_radius", self.sim_radius),
        ];
        for (field, value) in positive {
            // λ_u = 0 and p_b = 0 are legitimate degenerate cases.
            let allow_zero = matches!(field, "lambda_u" | "lambda_r" | "p_b");
            if !value.is_finite() || value < 0.0 || (value == 0.0 && !allow_zero) {
                return Err(Error::config(field, alloc::format!("must be positive, got {value}")));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::config("rho", alloc::format!("must lie in [0, 1], got {}", self.rho)));
        }
        if !(self.delta_theta > 0.0 && self.delta_theta <= 2.0 * PI) {
            return Err(Error::config(
                "delta_theta",
                alloc::format!("must lie in (0, 2π], got {}", self.delta_theta),
            ));
        }
        for (field, alpha) in [
            ("alpha_c", self.alpha_c),
            ("alpha_l", self.alpha_l),
            ("alpha_n", self.alpha_n),
        ] {
            if !(alpha.is_finite() && alpha > 2.0) {
                return Err(Error::config(field, alloc::format!("must exceed 2, got {alpha}")));
            }
        }
        if self.alpha_l >= self.alpha_n {
            return Err(Error::config("alpha_l", "must be smaller than alpha_n"));
        }
        if !(self.mu_radius.is_finite() && self.mu_radius > 0.0) {
            return Err(Error::config("mu_radius", "must be positive"));
        }
        Ok(())
    }

    pub fn wavelength_cell(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c_cell
    }

    pub fn wavelength_mm(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_c_mm
    }

    /// Path-loss exponent of a D2D link of length `r` under the LoS-ball model.
    #[inline]
    pub fn d2d_exponent(&self, r: f64) -> f64 {
        if r <= self.d_l {
            self.alpha_l
        } else {
            self.alpha_n
        }
    }

    /// Density of inactive users, i.e. potential D2D transmitters.
    pub fn idle_density(&self) -> f64 {
        self.lambda_u * (1.0 - self.rho)
    }
}

/// Content library: Zipf popularity, per-file rate constraints and cache sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentLibrary {
    epsilon: f64,
    rates: Vec<f64>,
    popularity: Vec<f64>,
    /// Device cache capacity, in files.
    pub m_d: usize,
    /// Edge-cloud cache capacity, in files.
    pub m_e: usize,
}

impl ContentLibrary {
    pub fn new(epsilon: f64, rates: Vec<f64>, m_d: usize, m_e: usize) -> Result<Self> {
        let n = rates.len();
        let popularity = zipf_popularity(n, epsilon)?;
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::config("rates", alloc::format!("must be positive, got {r}")));
        }
        if m_d > n {
            return Err(Error::config("m_d", alloc::format!("must not exceed N = {n}, got {m_d}")));
        }
        if m_e > n {
            return Err(Error::config("m_e", alloc::format!("must not exceed N = {n}, got {m_e}")));
        }
        Ok(Self {
            epsilon,
            rates,
            popularity,
            m_d,
            m_e,
        })
    }

    /// Library where every file carries the same rate constraint.
    pub fn with_uniform_rate(n: usize, epsilon: f64, rate: f64, m_d: usize, m_e: usize) -> Result<Self> {
        Self::new(epsilon, alloc::vec![rate; n], m_d, m_e)
    }

    /// 100 files, ε = 1.2, 1 Gbit/s for every file, M_d = 2, M_e = 50.
    pub fn reference() -> Self {
        Self::with_uniform_rate(100, 1.2, 1e9, 2, 50).expect("reference library is valid")
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Request probabilities β, most popular file first.
    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    /// Files held by the edge cloud: the `m_e` most popular ones.
    #[inline]
    pub fn in_edge_cloud(&self, file: usize) -> bool {
        file < self.m_e
    }
}

/// Zipf request probabilities β_i = i^{-ε} / Σ_j j^{-ε}, i = 1..N.
pub fn zipf_popularity(n: usize, epsilon: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::config("n_files", "library must hold at least one file"));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::config("epsilon", alloc::format!("must be nonnegative, got {epsilon}")));
    }
    let mut weights: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-epsilon)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// SINR needed to sustain `rate` bit/s over `bandwidth` Hz: 2^{R/B} − 1.
pub fn rate_threshold(rate: f64, bandwidth: f64) -> Result<f64> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::config("bandwidth", alloc::format!("must be positive, got {bandwidth}")));
    }
    if !(rate >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("rate must be nonnegative, got {rate}")));
    }
    Ok((rate / bandwidth).exp2() - 1.0)
}

/// Distribution of the antenna gain G′ seen on an interfering mmWave link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainPmf {
    /// Gain values: G_m², G_s², G_m·G_s.
    pub gains: [f64; 3],
    pub probs: [f64; 3],
}

impl GainPmf {
    pub fn mean(&self) -> f64 {
        self.gains.iter().zip(&self.probs).map(|(g, p)| g * p).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gains.iter().copied().zip(self.probs.iter().copied())
    }

    /// Inverse-CDF draw from a uniform `u` in [0, 1).
    pub fn sample(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (g, p) in self.iter() {
            acc += p;
            if u < acc {
                return g;
            }
        }
        // Round-off at the top of the CDF.
        self.iter().filter(|(_, p)| *p > 0.0).last().map(|(g, _)| g).unwrap_or(self.gains[0])
    }
}

/// Sectorized-pattern gain PMF for a uniformly oriented interferer.
pub fn interferer_gain_pmf(g_m: f64, g_s: f64, delta_theta: f64) -> Result<GainPmf> {
    if !(delta_theta > 0.0 && delta_theta <= 2.0 * PI) {
        return Err(Error::config(
            "delta_theta",
            alloc::format!("must lie in (0, 2π], got {delta_theta}"),
        ));
    }
    let two_pi = 2.0 * PI;
    let main = delta_theta / two_pi;
    let side = (two_pi - delta_theta) / two_pi;
    Ok(GainPmf {
        gains: [g_m * g_m, g_s * g_s, g_m * g_s],
        probs: [main * main, side * side, 2.0 * delta_theta * (two_pi - delta_theta) / (two_pi * two_pi)],
    })
}

/// Effective noise of the D2D link and of the cellular link, in the
/// normalized (unit-power, free-space reference) path-loss model.
pub fn effective_noise(config: &NetworkConfig) -> Result<(f64, f64)> {
    config.validate()?;
    let noise_scale = 16.0 * PI * PI * config.n_o * config.f_n;
    let w_d = config.wavelength_mm();
    let w_c = config.wavelength_cell();
    let n_hat = noise_scale * config.b_d / (config.p_d * w_d * w_d);
    let n_hat_c = noise_scale * config.b_c / (config.g_t * config.g_r * config.p_c * w_c * w_c);
    Ok((n_hat, n_hat_c))
}

/// Mean interference from a worst-case D2D layer (every active user served
/// over D2D) under the bounded path loss min(1, r^{-α(r)}), from Campbell's
/// theorem.
pub fn worst_case_avg_interference(config: &NetworkConfig) -> Result<f64> {
    let (a_l, a_n, d_l) = (config.alpha_l, config.alpha_n, config.d_l);
    if !(a_l > 2.0 && a_n > 2.0) {
        return Err(Error::DivergentIntegral(alloc::format!(
            "mean D2D interference needs alpha_l, alpha_n > 2 (got {a_l}, {a_n})"
        )));
    }
    let beam = config.g_m * config.delta_theta + config.g_s * (2.0 * PI - config.delta_theta);
    // Twice ∫ min(1, r^{-α(r)}) r dr over [0, ∞).
    let radial = if d_l >= 1.0 {
        (a_l - 2.0 * d_l.powf(2.0 - a_l)) / (a_l - 2.0) + 2.0 * d_l.powf(2.0 - a_n) / (a_n - 2.0)
    } else {
        // The whole LoS ball sits inside the unit disk where the loss is clipped.
        1.0 + 2.0 / (a_n - 2.0)
    };
    Ok(config.lambda_u * config.rho / (4.0 * PI) * beam * beam * radial)
}

/// Constants derived once per (config, library) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub n_hat: f64,
    pub n_hat_c: f64,
    pub i_bar: f64,
    pub gain_pmf: GainPmf,
    /// Per-file SINR thresholds on the mmWave D2D link (bandwidth B_d).
    pub d2d_thresholds: Vec<f64>,
    /// Per-file SINR thresholds on the cellular link (bandwidth B_c).
    pub cellular_thresholds: Vec<f64>,
}

impl DerivedConstants {
    pub fn new(config: &NetworkConfig, library: &ContentLibrary) -> Result<Self> {
        let (n_hat, n_hat_c) = effective_noise(config)?;
        let i_bar = worst_case_avg_interference(config)?;
        let gain_pmf = interferer_gain_pmf(config.g_m, config.g_s, config.delta_theta)?;
        let d2d_thresholds = library
            .rates()
            .iter()
            .map(|&r| rate_threshold(r, config.b_d))
            .collect::<Result<Vec<_>>>()?;
        let cellular_thresholds = library
            .rates()
            .iter()
            .map(|&r| rate_threshold(r, config.b_c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_hat,
            n_hat_c,
            i_bar,
            gain_pmf,
            d2d_thresholds,
            cellular_thresholds,
        })
    }
}
