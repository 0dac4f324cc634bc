//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval with the largest local error estimate is bisected until the
//! summed estimate drops below `max(abs_tol, rel_tol · |I|)`. Semi-infinite
//! integrals with algebraic tails are mapped onto (0, 1] so that no
//! truncation radius is needed.

use alloc::vec::Vec;


#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Tolerances for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_segments: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-15,
            max_segments: 2000,
        }
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// ∫_a^b f.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integral over `[points[0], points[last]]`, with the interior points
    /// used as initial subdivision (kinks, discontinuities, scale changes).
    pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(&self, mut f: F, points: &[f64]) -> Result<f64> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("integration needs at least two points".into()));
        }
        let (lower, upper) = (points[0], points[points.len() - 1]);
        let mut segments: Vec<Segment> = Vec::with_capacity(64);
        for w in points.windows(2) {
            if w[1] > w[0] {
                let (value, error) = gauss_kronrod(&mut f, w[0], w[1]);
                segments.push(Segment {
                    a: w[0],
                    b: w[1],
                    value,
                    error,
                });
            } else if w[1] < w[0] {
                return Err(Error::InvalidArgument("integration points must be nondecreasing".into()));
            }
        }
        loop {
            let (total, error) = segments
                .iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            if !(total.is_finite() && error.is_finite()) {
                return Err(Error::Integration {
                    lower,
                    upper,
                    estimate: total,
                    error,
                    segments: segments.len(),
                });
            }
            if error <= self.abs_tol.max(self.rel_tol * total.abs()) {
                return Ok(total);
            }
            if segments.len() >= self.max_segments {
                return Err(Error::Integration {
                    lower,
                    upper,
                    estimate: total,
                    error,
                    segments: segments.len(),
                });
            }
            let worst = segments
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let s = segments[worst];
            let mid = 0.5 * (s.a + s.b);
            if !(mid > s.a && mid < s.b) {
                // Interval exhausted at machine precision; remaining error is round-off.
                return Ok(total);
            }
            let (lv, le) = gauss_kronrod(&mut f, s.a, mid);
            let (rv, re) = gauss_kronrod(&mut f, mid, s.b);
            segments[worst] = Segment {
                a: s.a,
                b: mid,
                value: lv,
                error: le,
            };
            segments.push(Segment {
                a: mid,
                b: s.b,
                value: rv,
                error: re,
            });
        }
    }

    /// ∫_a^∞ f for an integrand decaying like v^{-decay}, decay > 1.
    ///
    /// Substitutes v = a · t^{-1/(decay-1)}, which turns a pure power tail into
    /// a constant on t ∈ (0, 1].
    pub fn integrate_power_tail<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, decay: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument("tail integration needs a positive lower limit".into()));
        }
        if !(decay > 1.0) {
            return Err(Error::DivergentIntegral(alloc::format!(
                "integrand decays like v^-{decay}, which is not integrable"
            )));
        }
        let k = 1.0 / (decay - 1.0);
        let jac_exp = -decay * k;
        self.integrate(
            move |t: f64| {
                let v = a * t.powf(-k);
                let fv = f(v);
                if fv == 0.0 {
                    0.0
                } else {
                    fv * a * k * t.powf(jac_exp)
                }
            },
            0.0,
            1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn smooth_and_peaked() {
        let q = Quadrature::default();
        let v = q.integrate(|x| x.sin(), 0.0, PI).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        // Narrow Gaussian spike, resolved only through adaptation.
        let v = q.integrate(|x| (-(x - 0.3) * (x - 0.3) / 2e-6).exp(), 0.0, 1.0).unwrap();
        assert!((v - (2e-6 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn breaks_handle_kinks() {
        let q = Quadrature::default();
        let v = q.integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 2.0]).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn power_tails() {
        let q = Quadrature::default();
        // ∫_2^∞ v^{-1.5} dv = 2 / √2
        let v = q.integrate_power_tail(|v| v.powf(-1.5), 2.0, 1.5).unwrap();
        assert!((v - 2.0 / 2.0_f64.sqrt()).abs() < 1e-12);
        // ∫_1^∞ 1/(1+v²) dv = π/4
        let v = q.integrate_power_tail(|v| 1.0 / (1.0 + v * v), 1.0, 2.0).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-12);
        // Exponential tail through the same map.
        let v = q.integrate_power_tail(|v| (-v).exp(), 1.0, 2.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn divergent_tail_rejected() {
        let q = Quadrature::default();
        assert!(matches!(
            q.integrate_power_tail(|v| 1.0 / v, 1.0, 1.0),
            Err(Error::DivergentIntegral(_))
        ));
    }

    #[test]
    fn non_convergence_reports_diagnostics() {
        let q = Quadrature {
            max_segments: 4,
            ..Quadrature::default()
        };
        match q.integrate(|x: f64| x.powf(-0.9), 0.0, 1.0) {
            Err(Error::Integration { segments, .. }) => assert_eq!(segments, 4),
            other => panic!("expected failure, got {other:?}"),
        }
        assert!(Quadrature::default().integrate(|_| f64::NAN, 0.0, 1.0).is_err());
    }
}
