//! Threshold design for the 1-bit quantizer.
//!
//! For single-stream cells the expected metric of the served user has an
//! exact minimizer. For more streams the threshold minimizes an upper bound
//! on the expected metric, either exactly through the lower Lambert W branch,
//! through its large-K expansion, or by direct numerical minimization.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grassmann::ManifoldParams;
use crate::lambert::{lambert_w, Branch};
use crate::oia::{expected_metric_one_bit, expected_metric_upper_bound};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdMethod {
    ClosedFormD1,
    Lambert,
    Asymptotic,
    Numeric,
}

impl ThresholdMethod {
    pub const ALL: [ThresholdMethod; 4] =
        [Self::ClosedFormD1, Self::Lambert, Self::Asymptotic, Self::Numeric];

    pub fn name(self) -> &'static str {
        match self {
            Self::ClosedFormD1 => "closed_form_d1",
            Self::Lambert => "lambert",
            Self::Asymptotic => "asymptotic",
            Self::Numeric => "numeric",
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown threshold method `{s}`")))
    }
}

/// Constants of the Lambert solution `y = (A log K + B)/K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertAux {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    /// `c x^D` at the returned threshold.
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    pub x: f64,
    pub method: ThresholdMethod,
    pub k: u64,
    pub params: ManifoldParams,
    pub aux: Option<LambertAux>,
}

fn lambert_aux(p: &ManifoldParams, y: f64) -> LambertAux {
    let big_d = p.exponent_f64();
    let alpha = 1.0 / big_d - 1.0;
    let neg_alpha_log = if alpha == 0.0 { 0.0 } else { alpha * (-alpha).ln() };
    LambertAux {
        a: alpha + 1.0,
        b: (big_d * p.d_f64() * p.c.powf(alpha)).ln() - neg_alpha_log,
        alpha,
        y,
    }
}

/// `x = 1 − (1/K)^{1/(K−1)}`, the exact minimizer for one stream over
/// G(2,1). `K = 1` returns the limit `1 − 1/e`.
pub fn optimal_threshold_d1(k: u64) -> Result<ThresholdSpec> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let x = if k == 1 {
        -(-1.0f64).exp_m1()
    } else {
        let kf = k as f64;
        -(-kf.ln() / (kf - 1.0)).exp_m1()
    };
    Ok(ThresholdSpec { x, method: ThresholdMethod::ClosedFormD1, k, params: ManifoldParams::new(2, 1)?, aux: None })
}

/// Minimum expected metric for one stream,
/// `½ (1/K)^{K/(K−1)} − ½ (1/K)^{1/(K−1)} + ½`.
pub fn min_expected_metric_d1(k: u64) -> f64 {
    assert!(k >= 2, "needs K >= 2");
    let kf = k as f64;
    let a = kf.ln() / (kf - 1.0);
    0.5 * (-kf * a).exp() - 0.5 * (-a).exp_m1()
}

/// Solves the stationarity condition of the large-K bound
/// `(y/c)^{1/D} + d e^{−Ky}` through `W_{−1}`:
/// `y = (α/K) W_{−1}(K c (D d K)^{1/α} / α)` with `α = 1/D − 1`.
///
/// A single-dimension exponent (`α = 0`) takes the limit `y = log K / K`.
pub fn threshold_lambert(k: u64, p: &ManifoldParams) -> Result<ThresholdSpec> {
    if k == 0 {
        return Err(Error::TooFewUsers { k });
    }
    let big_d = p.exponent_f64();
    let kf = k as f64;
    let alpha = 1.0 / big_d - 1.0;
    let y = if alpha == 0.0 {
        kf.ln() / kf
    } else {
        let z = kf * p.c * (big_d * p.d_f64() * kf).powf(1.0 / alpha) / alpha;
        if z.is_nan() || z >= 0.0 {
            return Err(Error::TooFewUsers { k });
        }
        let w = lambert_w(Branch::Lower, z).map_err(|_| Error::TooFewUsers { k })?;
        alpha * w / kf
    };
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::TooFewUsers { k });
    }
    let x = (y / p.c).powf(1.0 / big_d);
    Ok(ThresholdSpec { x, method: ThresholdMethod::Lambert, k, params: *p, aux: Some(lambert_aux(p, y)) })
}

/// Large-K threshold `x = ((A log K + B)/(c K))^{1/D}` with `A = 1/D`
/// and the constant `B` dropped.
pub fn threshold_asymptotic(k: u64, p: &ManifoldParams) -> Result<ThresholdSpec> {
    threshold_asymptotic_with_offset(k, p, 0.0)
}

/// As [`threshold_asymptotic`] with an explicit constant term `B`.
/// The result is clipped to the model support.
pub fn threshold_asymptotic_with_offset(k: u64, p: &ManifoldParams, b: f64) -> Result<ThresholdSpec> {
    if k < 2 {
        return Err(Error::TooFewUsers { k });
    }
    let big_d = p.exponent_f64();
    let kf = k as f64;
    let a = 1.0 / big_d;
    let y = (a * kf.ln() + b) / kf;
    if y.is_nan() || y <= 0.0 {
        return Err(Error::TooFewUsers { k });
    }
    let x = (y / p.c).powf(1.0 / big_d).min(p.x_hat());
    let mut aux = lambert_aux(p, y.min(1.0));
    aux.b = b;
    Ok(ThresholdSpec { x, method: ThresholdMethod::Asymptotic, k, params: *p, aux: Some(aux) })
}

/// Objective minimized by [`threshold_numeric_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Exact expected metric of the served user (model law).
    ExpectedMetric,
    /// `x + (d − x)(1 − c x^D)^K`.
    UpperBound,
}

pub const NUMERIC_GRID_POINTS: usize = 10_000;
const GRID_DECADES: f64 = 9.0;

/// Log-spaced grid on `(0, x̂]` used by the numeric search.
pub fn numeric_grid(x_hat: f64) -> Vec<f64> {
    let n = NUMERIC_GRID_POINTS;
    (0..n)
        .map(|i| x_hat * 10f64.powf(-GRID_DECADES * (1.0 - i as f64 / (n - 1) as f64)))
        .collect()
}

/// Global minimizer over `(0, x̂]` by grid scan then golden-section
/// refinement. One stream minimizes the exact expected metric, otherwise
/// the upper bound.
pub fn threshold_numeric(k: u64, p: &ManifoldParams) -> Result<ThresholdSpec> {
    let objective = if p.exponent == 1 { Objective::ExpectedMetric } else { Objective::UpperBound };
    threshold_numeric_with(k, p, objective)
}

pub fn threshold_numeric_with(k: u64, p: &ManifoldParams, objective: Objective) -> Result<ThresholdSpec> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let f = |x: f64| match objective {
        Objective::ExpectedMetric => expected_metric_one_bit(x, k, p),
        Objective::UpperBound => expected_metric_upper_bound(x, k, p),
    };
    let grid = numeric_grid(p.x_hat());
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let x = golden_section(f, lo, hi, 1e-10);
    // Keep the grid point if refinement drifted onto a worse value.
    let x = if f(x) <= values[best] { x } else { grid[best] };
    Ok(ThresholdSpec { x, method: ThresholdMethod::Numeric, k, params: *p, aux: None })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= rel_tol * b.abs() {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Dispatches on `method`. `closed_form_d1` requires G(2,1).
pub fn threshold(method: ThresholdMethod, k: u64, p: &ManifoldParams) -> Result<ThresholdSpec> {
    match method {
        ThresholdMethod::ClosedFormD1 => {
            if (p.n, p.d) != (2, 1) {
                return Err(Error::Config(format!(
                    "closed_form_d1 needs nr = 2, d = 1 (got nr = {}, d = {})",
                    p.n, p.d
                )));
            }
            optimal_threshold_d1(k)
        }
        ThresholdMethod::Lambert => threshold_lambert(k, p),
        ThresholdMethod::Asymptotic => threshold_asymptotic(k, p),
        ThresholdMethod::Numeric => threshold_numeric(k, p),
    }
}
