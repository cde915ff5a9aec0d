//! Real branches of the Lambert W function, `W(z) e^{W(z)} = z`.

use crate::error::{Error, Result};

/// Real branch selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `W_0`, defined on `[−1/e, ∞)`, values `≥ −1`.
    Principal,
    /// `W_{−1}`, defined on `[−1/e, 0)`, values `≤ −1`.
    Lower,
}

impl Branch {
    pub fn index(self) -> i32 {
        match self {
            Branch::Principal => 0,
            Branch::Lower => -1,
        }
    }

    pub fn from_index(k: i32) -> Option<Self> {
        match k {
            0 => Some(Branch::Principal),
            -1 => Some(Branch::Lower),
            _ => None,
        }
    }
}

const INV_E: f64 = 0.367_879_441_171_442_33;

fn residual_ok(w: f64, z: f64) -> bool {
    (w * w.exp() - z).abs() <= 1e-12 * z.abs().max(1.0)
}

/// Evaluates `W_branch(z)`.
///
/// Starts from the branch-point series near `−1/e` and from the
/// logarithmic expansion elsewhere, refines with Halley steps, and falls
/// back to bisection if the residual is not met.
pub fn lambert_w(branch: Branch, z: f64) -> Result<f64> {
    let domain = || Error::LambertDomain { branch: branch.index(), z };
    // Accept a few ulps of slack around the branch point.
    if z.is_nan() || z < -INV_E * (1.0 + 4.0 * f64::EPSILON) {
        return Err(domain());
    }
    if branch == Branch::Lower && z >= 0.0 {
        return Err(domain());
    }
    if z == 0.0 || (branch == Branch::Principal && z == f64::INFINITY) {
        return Ok(z);
    }
    let z = z.max(-INV_E);
    let p2 = 2.0 * (std::f64::consts::E * z + 1.0);
    if p2 <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = match branch {
        Branch::Principal if p2 < 0.5 => {
            let p = p2.sqrt();
            -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
        }
        Branch::Principal if z < 3.0 => z.ln_1p(),
        Branch::Principal => {
            let l1 = z.ln();
            let l2 = l1.ln();
            l1 - l2 + l2 / l1
        }
        Branch::Lower if p2 < 0.5 => {
            let p = p2.sqrt();
            -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p
        }
        Branch::Lower => {
            let l1 = (-z).ln();
            let l2 = (-l1).ln();
            l1 - l2 + l2 / l1
        }
    };

    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if f == 0.0 || wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let mut next = w - step;
        next = match branch {
            Branch::Principal => next.max(-1.0),
            Branch::Lower => next.min(-1.0),
        };
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }

    if residual_ok(w, z) {
        Ok(w)
    } else {
        Ok(bisect(branch, z))
    }
}

fn bisect(branch: Branch, z: f64) -> f64 {
    let f = |w: f64| w * w.exp() - z;
    // f increases on [−1, ∞) and decreases on (−∞, −1].
    let (mut lo, mut hi) = match branch {
        Branch::Principal => (-1.0, z.max(1.0).ln().max(1.0) + 1.0),
        Branch::Lower => (2.0 * (-z).ln() - 10.0, -1.0),
    };
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = match branch {
            Branch::Principal => f(mid) < 0.0,
            Branch::Lower => f(mid) > 0.0,
        };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
        let (la, lb) = (a.log10(), b.log10());
        (0..n).map(move |i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64))
    }

    #[test]
    fn special_points() {
        assert_eq!(lambert_w(Branch::Principal, 0.0).unwrap(), 0.0);
        let bp = -(-1.0f64).exp();
        assert!((lambert_w(Branch::Principal, bp).unwrap() + 1.0).abs() < 1e-7);
        assert!((lambert_w(Branch::Lower, bp).unwrap() + 1.0).abs() < 1e-7);
        assert!((lambert_w(Branch::Principal, std::f64::consts::E).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lower_branch_matches_bisection_oracle() {
        // Independent bisection on w e^w = −0.1 over [−20, −1].
        let (mut lo, mut hi) = (-20.0f64, -1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > -0.1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = lambert_w(Branch::Lower, -0.1).unwrap();
        assert!((w - 0.5 * (lo + hi)).abs() < 1e-12);
        assert!((w + 3.577152).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(lambert_w(Branch::Principal, -0.5), Err(Error::LambertDomain { .. })));
        assert!(matches!(lambert_w(Branch::Lower, 0.0), Err(Error::LambertDomain { .. })));
        assert!(matches!(lambert_w(Branch::Lower, 0.3), Err(Error::LambertDomain { .. })));
        assert!(lambert_w(Branch::Lower, f64::NAN).is_err());
        assert_eq!(Branch::from_index(2), None);
    }

    #[test]
    fn residuals_and_branch_ranges() {
        for z in logspace(1e-300, INV_E, 1000).map(|z| z.min(INV_E)) {
            let w = lambert_w(Branch::Lower, -z).unwrap();
            assert!(w <= -1.0);
            assert!(residual_ok(w, -z), "W-1({}) = {w}", -z);
            let w0 = lambert_w(Branch::Principal, -z).unwrap();
            assert!(w0 >= -1.0);
            assert!(residual_ok(w0, -z));
        }
        for z in logspace(1e-300, 1e300, 1000) {
            let w = lambert_w(Branch::Principal, z).unwrap();
            assert!(residual_ok(w, z), "W0({z}) = {w}");
        }
    }
}
