//! User selection for opportunistic interference alignment: argmin over
//! real-valued feedback, and threshold-based 1-bit feedback with its
//! closed-form performance functionals under the model metric law.

use rand::Rng;

use crate::grassmann::{metric_cdf, ManifoldParams};

/// Selection made by one transmitter from 1-bit reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionOutcome {
    pub selected: usize,
    pub outage: bool,
    pub eligible_count: usize,
    /// `feedback_bits[k]` is user `k`'s report ('1' = below threshold).
    pub feedback_bits: Vec<bool>,
}

/// Index of the smallest metric; ties go to the lowest index.
pub fn select_conventional(metrics: &[f64]) -> usize {
    assert!(!metrics.is_empty(), "no users to select from");
    let mut best = 0;
    for (k, &m) in metrics.iter().enumerate().skip(1) {
        if m < metrics[best] {
            best = k;
        }
    }
    best
}

/// Each user reports `metric < x`. A uniformly random reporting user is
/// served; if nobody reports, a uniformly random user is served and the
/// cell is in scheduling outage.
pub fn select_one_bit<R: Rng + ?Sized>(metrics: &[f64], x: f64, rng: &mut R) -> SelectionOutcome {
    assert!(!metrics.is_empty(), "no users to select from");
    let feedback_bits: Vec<bool> = metrics.iter().map(|&m| m < x).collect();
    let eligible_count = feedback_bits.iter().filter(|&&b| b).count();
    let (selected, outage) = if eligible_count == 0 {
        (rng.random_range(0..metrics.len()), true)
    } else {
        let nth = rng.random_range(0..eligible_count);
        let k = feedback_bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .nth(nth)
            .map(|(k, _)| k)
            .expect("nth eligible user exists");
        (k, false)
    };
    SelectionOutcome { selected, outage, eligible_count, feedback_bits }
}

/// `(1 − F(x))^K`.
pub fn outage_probability(x: f64, k: u64, p: &ManifoldParams) -> f64 {
    let f = metric_cdf(x, p);
    if f >= 1.0 {
        0.0
    } else {
        (k as f64 * (-f).ln_1p()).exp()
    }
}

/// Conditional means of the metric below and above `x` under the model
/// density `c D t^{D−1}` on `[0, x̂]`: `(E[D | D < x], E[D | D ≥ x])`.
pub fn conditional_means(x: f64, p: &ManifoldParams) -> (f64, f64) {
    let big_d = p.exponent_f64();
    let x_hat = p.x_hat();
    let x = x.clamp(0.0, x_hat);
    let ratio = big_d / (big_d + 1.0);
    let below = ratio * x;
    let tail = 1.0 - metric_cdf(x, p);
    // ∫_x^x̂ t f(t) dt = ratio·(x̂ − c x^{D+1}), using c x̂^D = 1.
    let above = if tail <= 1e-15 {
        x_hat
    } else {
        ratio * (x_hat - p.c * x.powi(p.exponent as i32 + 1)) / tail
    };
    (below, above)
}

/// Expected metric of the user served under 1-bit feedback with threshold `x`.
pub fn expected_metric_one_bit(x: f64, k: u64, p: &ManifoldParams) -> f64 {
    let p_out = outage_probability(x, k, p);
    let (below, above) = conditional_means(x, p);
    (1.0 - p_out) * below + p_out * above
}

/// `x + (d − x)(1 − c x^D)^K`, obtained by replacing each conditional mean
/// with the upper end of its interval.
pub fn expected_metric_upper_bound(x: f64, k: u64, p: &ManifoldParams) -> f64 {
    x + (p.d_f64() - x) * outage_probability(x, k, p)
}

/// Mean number of users reporting '1', `K F(x)`.
pub fn expected_eligible(x: f64, k: u64, p: &ManifoldParams) -> f64 {
    k as f64 * metric_cdf(x, p)
}
