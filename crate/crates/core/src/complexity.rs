//! FLOP counts of the feedback quantization workload per cell.
//!
//! One FLOP is a real addition, multiplication or division; a complex
//! addition costs 2 and a complex multiplication 6. Counts are exact
//! integers.
//!
//! Note: the Gram-product count uses the same expression as the GSO count.
//! A Gram product of an `M × N` matrix would normally scale with `M²N`;
//! the expression is left as is because the per-cell totals depend on it.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlopScheme {
    Oia1Bit,
    IaJoint,
    IaIndividual,
}

impl FlopScheme {
    pub const ALL: [FlopScheme; 3] = [Self::Oia1Bit, Self::IaJoint, Self::IaIndividual];

    pub fn name(self) -> &'static str {
        match self {
            Self::Oia1Bit => "oia_1bit",
            Self::IaJoint => "ia_joint",
            Self::IaIndividual => "ia_individual",
        }
    }
}

impl fmt::Display for FlopScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlopReport {
    pub scheme: FlopScheme,
    pub n_bits: u32,
    pub flops: u64,
}

/// `‖A‖_F` of an `M × N` complex matrix: `4MN`.
pub fn flops_frobenius(m: u64, n: u64) -> u64 {
    4 * m * n
}

/// Gram-Schmidt orthogonalization: `8N²M − 2MN`.
pub fn flops_gso(m: u64, n: u64) -> u64 {
    8 * n * n * m - 2 * m * n
}

/// `A A^H`: `8N²M − 2MN` (same expression as [`flops_gso`]).
pub fn flops_matmul_gram(m: u64, n: u64) -> u64 {
    8 * n * n * m - 2 * m * n
}

fn overflow(bits: u32) -> Error {
    Error::BitsOverflow(bits)
}

/// One chordal-distance evaluation per user and one user per bit:
/// two GSOs, two Gram products, one matrix subtraction and a norm.
pub fn flops_oia_1bit(nr: u64, d: u64, n_bits: u32) -> Result<u64> {
    let per_user = 2 * flops_gso(nr, d) + 2 * flops_matmul_gram(nr, d) + 2 * nr * d + flops_frobenius(nr, d);
    per_user.checked_mul(n_bits as u64).ok_or_else(|| overflow(n_bits))
}

/// Cost of one composite distance on `C^{nr·nt}` lines.
fn composite_distance_flops(nr: u64, nt: u64) -> u64 {
    64 * nr * nt - 4 * nr * nt
}

fn pow2(bits: u32) -> Result<u64> {
    if bits > 62 {
        return Err(overflow(bits));
    }
    Ok(1u64 << bits)
}

/// Exhaustive search of a `2^bits` composite codebook.
pub fn flops_ia_joint(nr: u64, nt: u64, n_bits: u32) -> Result<u64> {
    pow2(n_bits)?.checked_mul(composite_distance_flops(nr, nt)).ok_or_else(|| overflow(n_bits))
}

/// Two searches of `2^{bits/2}` entries on individual manifolds.
pub fn flops_ia_individual(nr: u64, nt: u64, n_bits: u32) -> Result<u64> {
    if !n_bits.is_multiple_of(2) {
        return Err(Error::OddBitSplit(n_bits));
    }
    pow2(n_bits / 2)?.checked_mul(composite_distance_flops(nr, nt)).ok_or_else(|| overflow(n_bits))
}

/// Report for `scheme` with receive dimension `nr` and `second` = `d`
/// (OIA) or `nt` (IA).
pub fn flop_report(scheme: FlopScheme, nr: u64, second: u64, n_bits: u32) -> Result<FlopReport> {
    let flops = match scheme {
        FlopScheme::Oia1Bit => flops_oia_1bit(nr, second, n_bits)?,
        FlopScheme::IaJoint => flops_ia_joint(nr, second, n_bits)?,
        FlopScheme::IaIndividual => flops_ia_individual(nr, second, n_bits)?,
    };
    Ok(FlopReport { scheme, n_bits, flops })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_counts() {
        assert_eq!(flops_frobenius(2, 1), 8);
        assert_eq!(flops_frobenius(1, 1), 4);
        assert_eq!(flops_frobenius(4, 2), 32);
        assert_eq!(flops_gso(2, 1), 12);
        assert_eq!(flops_gso(4, 2), 112);
        assert_eq!(flops_matmul_gram(2, 1), 12);
        assert_eq!(flops_matmul_gram(4, 2), 112);
        for m in 1..6 {
            for n in 1..=m {
                assert_eq!(flops_gso(m, n), flops_matmul_gram(m, n));
            }
        }
    }

    #[test]
    fn oia_counts_match_closed_form() {
        assert_eq!(flops_oia_1bit(2, 1, 10).unwrap(), 600);
        assert_eq!(flops_oia_1bit(2, 1, 1).unwrap(), 60);
        assert_eq!(flops_oia_1bit(4, 2, 100).unwrap(), 49_600);
        for nr in 2..8u64 {
            for d in 1..=nr / 2 {
                assert_eq!(flops_oia_1bit(nr, d, 7).unwrap(), 7 * (32 * nr * d * d - 2 * nr * d));
            }
        }
    }

    #[test]
    fn ia_counts() {
        assert_eq!(flops_ia_joint(2, 2, 1).unwrap(), 480);
        assert_eq!(flops_ia_joint(2, 2, 10).unwrap(), 245_760);
        assert_eq!(flops_ia_joint(2, 2, 0).unwrap(), 240);
        assert_eq!(flops_ia_individual(2, 2, 10).unwrap(), 7680);
        assert_eq!(flops_ia_individual(2, 2, 2).unwrap(), 480);
        assert!(matches!(flops_ia_individual(2, 2, 3), Err(Error::OddBitSplit(3))));
        assert!(matches!(flops_ia_joint(2, 2, 63), Err(Error::BitsOverflow(63))));
        assert!(flops_ia_joint(2, 2, 62).is_err(), "2^62 * 240 overflows u64");
    }

    #[test]
    fn linear_and_exponential_growth() {
        for b in 1..20u32 {
            for k in 1..5u32 {
                assert_eq!(flops_oia_1bit(2, 1, k * b).unwrap(), k as u64 * flops_oia_1bit(2, 1, b).unwrap());
            }
        }
        let ratio = |b: u32| flops_ia_individual(2, 2, b).unwrap() as f64 / flops_oia_1bit(2, 1, b).unwrap() as f64;
        // 2 and 4 bits tie at a ratio of 8; growth is strict from there on.
        assert_eq!(ratio(2), ratio(4));
        let mut prev = ratio(4);
        for b in (6..=40).step_by(2) {
            let r = ratio(b);
            assert!(r > prev);
            prev = r;
        }
        assert!(ratio(10) > 10.0);
    }

    #[test]
    fn report_dispatch() {
        let r = flop_report(FlopScheme::IaIndividual, 2, 2, 10).unwrap();
        assert_eq!((r.scheme, r.n_bits, r.flops), (FlopScheme::IaIndividual, 10, 7680));
    }
}
