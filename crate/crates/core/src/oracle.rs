//! Reference procedures used to validate the fast solvers and the simulator.
//! Slow by design; enabled for tests and with the `oracle` feature.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

/// Maximizes `objective(q)` over { q ∈ [0,1]^n : Σ q ≤ budget } without any
/// knowledge of its structure beyond concavity: greedy allocation of
/// `step`-sized increments (exact on the grid for separable concave
/// objectives), followed by pairwise transfers of shrinking size down to
/// `1e-12`.
pub fn grid_refine_maximize<F: Fn(&[f64]) -> f64>(n: usize, budget: f64, step: f64, objective: F) -> Vec<f64> {
    let mut q = vec![0.0; n];
    let units = (budget / step).floor() as usize;
    let mut value = objective(&q);
    for _ in 0..units {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if q[i] + step > 1.0 + 1e-12 {
                continue;
            }
            let old = q[i];
            q[i] = (old + step).min(1.0);
            let v = objective(&q);
            q[i] = old;
            if v > value && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((i, v));
            }
        }
        match best {
            Some((i, v)) => {
                q[i] = (q[i] + step).min(1.0);
                value = v;
            }
            None => break,
        }
    }
    refine(&mut q, budget, step, &objective);
    q
}

fn refine<F: Fn(&[f64]) -> f64>(q: &mut [f64], budget: f64, start: f64, objective: &F) {
    let n = q.len();
    let mut value = objective(q);
    let mut delta = start;
    while delta > 1e-12 {
        let mut improved = true;
        let mut sweeps = 0;
        while improved && sweeps < 10_000 {
            improved = false;
            sweeps += 1;
            // Fill any slack first.
            for i in 0..n {
                let slack = budget - q.iter().sum::<f64>();
                let d = delta.min(slack).min(1.0 - q[i]);
                if d > 0.0 {
                    let old = q[i];
                    q[i] += d;
                    let v = objective(q);
                    if v > value {
                        value = v;
                        improved = true;
                    } else {
                        q[i] = old;
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let d = delta.min(1.0 - q[i]).min(q[j]);
                    if d <= 0.0 {
                        continue;
                    }
                    let (oi, oj) = (q[i], q[j]);
                    q[i] += d;
                    q[j] -= d;
                    let v = objective(q);
                    if v > value {
                        value = v;
                        improved = true;
                    } else {
                        q[i] = oi;
                        q[j] = oj;
                    }
                }
            }
        }
        delta *= 0.5;
    }
}

/// Literal exhaustive search over the `step` grid (small n only).
pub fn exhaustive_grid_maximize<F: Fn(&[f64]) -> f64>(n: usize, budget: f64, step: f64, objective: F) -> (Vec<f64>, f64) {
    let levels = (1.0 / step).round() as usize;
    let mut idx = vec![0usize; n];
    let mut best = (vec![0.0; n], f64::NEG_INFINITY);
    let mut q = vec![0.0; n];
    loop {
        let total: usize = idx.iter().sum();
        if total as f64 * step <= budget + 1e-9 {
            for (x, &k) in q.iter_mut().zip(&idx) {
                *x = k as f64 * step;
            }
            let v = objective(&q);
            if v > best.1 {
                best = (q.clone(), v);
            }
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] <= levels {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Kolmogorov–Smirnov statistic of `samples` against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS statistic `d` from `n` samples.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
