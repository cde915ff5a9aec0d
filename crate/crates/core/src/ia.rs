//! Interference-alignment baseline for three 2×2 single-stream links:
//! closed-form precoders, composite Grassmannian quantization of the
//! aggregated cross channels, and a perturbation model of RVQ error.

use rand::Rng;

use crate::channel::{interferers, CELLS};
use crate::error::{Error, Result};
use crate::grassmann::{quantization_bound_for, span_distance_sq, ManifoldParams};
use crate::linalg::{complex_normal, frobenius_sq, gaussian_matrix, hermitian_eigen_desc, normalize_phase, CMatrix, CVector, C64};

/// Largest condition number accepted for a cross channel.
pub const MAX_CONDITION: f64 = 1e12;

/// One user per cell: `h[i][j]` is the channel from transmitter `j` to
/// receiver `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct IaDrop {
    pub h: [[CMatrix; CELLS]; CELLS],
}

impl IaDrop {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, nr: usize, nt: usize) -> Self {
        Self { h: std::array::from_fn(|_| std::array::from_fn(|_| gaussian_matrix(rng, nr, nt))) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedChannel {
    pub w1: CVector,
    pub w2: CVector,
}

/// Codebook of `2^bits` pairs of unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeCodebook {
    pub entries: Vec<(CVector, CVector)>,
    pub bits: u32,
}

impl CompositeCodebook {
    /// Random (RVQ) codebook with isotropic unit-norm entries.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, bits: u32, len: usize) -> Self {
        let entries = (0..1usize << bits)
            .map(|_| (random_unit_vector(rng, len), random_unit_vector(rng, len)))
            .collect();
        Self { entries, bits }
    }

    /// Product of two per-vector codebooks; entry `a * |b| + b`.
    pub fn product(first: &[CVector], second: &[CVector]) -> Self {
        let entries: Vec<_> =
            first.iter().flat_map(|a| second.iter().map(move |b| (a.clone(), b.clone()))).collect();
        let bits = entries.len().trailing_zeros();
        Self { entries, bits }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IaSolution {
    pub precoders: [CVector; CELLS],
    pub receive_filters: [CVector; CELLS],
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    loop {
        let v = CVector::from_fn(len, |_, _| complex_normal(rng));
        let n = v.norm();
        if n > 0.0 {
            return v.unscale(n);
        }
    }
}

fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if lo > 0.0 { hi / lo } else { f64::INFINITY }
}

fn inverse(m: &CMatrix) -> Result<CMatrix> {
    if condition_number(m) >= MAX_CONDITION {
        return Err(Error::DegenerateChannel);
    }
    m.clone().try_inverse().ok_or(Error::DegenerateChannel)
}

/// Eigenvector of a 2×2 matrix for its largest-magnitude eigenvalue,
/// unit norm, first nonzero entry real positive.
fn dominant_eigenvector_2x2(e: &CMatrix) -> CVector {
    let (a, b, c, d) = (e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
    let half_tr = (a + d) * 0.5;
    let disc = (half_tr * half_tr - (a * d - b * c)).sqrt();
    let (l1, l2) = (half_tr + disc, half_tr - disc);
    let lambda = if l1.norm() >= l2.norm() { l1 } else { l2 };
    let cand1 = CVector::from_vec(vec![b, lambda - a]);
    let cand2 = CVector::from_vec(vec![lambda - d, c]);
    let mut v = if cand1.norm() >= cand2.norm() { cand1 } else { cand2 };
    let n = v.norm();
    if n == 0.0 {
        // E is a multiple of the identity: every vector is an eigenvector.
        v = CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    } else {
        v.unscale_mut(n);
    }
    normalize_phase(&mut v);
    v
}

fn unit(v: CVector) -> Result<CVector> {
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::DegenerateChannel);
    }
    Ok(v.unscale(n))
}

/// Minimum-interference receive vector for receiver `i` given precoders.
fn receive_filter(h: &[[CMatrix; CELLS]; CELLS], v: &[CVector; CELLS], i: usize) -> CVector {
    let (p, q) = interferers(i);
    let a = &h[i][p] * &v[p];
    let b = &h[i][q] * &v[q];
    let r = &a * a.adjoint() + &b * b.adjoint();
    let (_, vecs) = hermitian_eigen_desc(&r);
    let mut u = vecs.column(r.nrows() - 1).into_owned();
    normalize_phase(&mut u);
    u
}

/// Closed-form alignment from the six cross channels of `h` (diagonal
/// blocks are ignored). Requires 2×2 channels.
pub fn closed_form_ia_from(h: &[[CMatrix; CELLS]; CELLS]) -> Result<IaSolution> {
    for (i, row) in h.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            if m.shape() != (2, 2) {
                return Err(Error::ShapeMismatch(format!("closed-form IA needs 2x2 channels, H[{i}][{j}] is {:?}", m.shape())));
            }
        }
    }
    // E = H31⁻¹ H32 H12⁻¹ H13 H23⁻¹ H21 (1-based cell labels).
    let e = inverse(&h[2][0])? * &h[2][1] * inverse(&h[0][1])? * &h[0][2] * inverse(&h[1][2])? * &h[1][0];
    let v0 = dominant_eigenvector_2x2(&e);
    let v1 = unit(inverse(&h[2][1])? * &h[2][0] * &v0)?;
    let v2 = unit(inverse(&h[1][2])? * &h[1][0] * &v0)?;
    // Conditioning of the remaining cross channels.
    inverse(&h[0][1])?;
    inverse(&h[0][2])?;
    let precoders = [v0, v1, v2];
    let receive_filters = std::array::from_fn(|i| receive_filter(h, &precoders, i));
    Ok(IaSolution { precoders, receive_filters })
}

pub fn closed_form_ia(drop: &IaDrop) -> Result<IaSolution> {
    closed_form_ia_from(&drop.h)
}

/// Largest squared chordal distance between the two interference
/// directions over the three receivers (0 when perfectly aligned).
pub fn alignment_residual(drop: &IaDrop, sol: &IaSolution) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..CELLS {
        let (p, q) = interferers(i);
        let a = &drop.h[i][p] * &sol.precoders[p];
        let b = &drop.h[i][q] * &sol.precoders[q];
        let dist = span_distance_sq(
            nalgebra::DMatrixView::from_slice(a.as_slice(), a.len(), 1),
            nalgebra::DMatrixView::from_slice(b.as_slice(), b.len(), 1),
        )?;
        worst = worst.max(dist);
    }
    Ok(worst)
}

/// `|u_i^H H_ij v_j|² / |u_i^H H_ii v_i|²`, maximized over `j ≠ i`.
pub fn leakage_ratio(drop: &IaDrop, sol: &IaSolution) -> f64 {
    let gain = |i: usize, j: usize| sol.receive_filters[i].dotc(&(&drop.h[i][j] * &sol.precoders[j])).norm_sqr();
    (0..CELLS)
        .flat_map(|i| {
            let (p, q) = interferers(i);
            [gain(i, p) / gain(i, i), gain(i, q) / gain(i, i)]
        })
        .fold(0.0, f64::max)
}

/// Sum over the three links of `log2(1 + P |u^H H_ii v_i|² / (1 + P Σ_{j≠i} |u^H H_ij v_j|²))`.
pub fn ia_sum_rate(drop: &IaDrop, sol: &IaSolution, p: f64) -> f64 {
    (0..CELLS)
        .map(|i| {
            let g = |j: usize| sol.receive_filters[i].dotc(&(&drop.h[i][j] * &sol.precoders[j])).norm_sqr();
            let (a, b) = interferers(i);
            (1.0 + p * g(i) / (1.0 + p * (g(a) + g(b)))).log2()
        })
        .sum()
}

fn vectorize_unit(m: &CMatrix) -> CVector {
    let v = CVector::from_column_slice(m.as_slice());
    let n = v.norm();
    v.unscale(n)
}

/// Column-major vectorized, unit-normalized cross channels of receiver `i`.
pub fn aggregate_channel(drop: &IaDrop, i: usize) -> AggregatedChannel {
    let (p, q) = interferers(i);
    AggregatedChannel { w1: vectorize_unit(&drop.h[i][p]), w2: vectorize_unit(&drop.h[i][q]) }
}

/// Squared chordal distance between two lines, `1 − |a^H b|²` for unit vectors.
pub fn line_distance_sq(a: &CVector, b: &CVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    Ok((1.0 - a.dotc(b).norm_sqr()).clamp(0.0, 1.0))
}

/// `d_c²(w1, c1) + d_c²(w2, c2)`.
pub fn composite_distance(w: &AggregatedChannel, c: (&CVector, &CVector)) -> Result<f64> {
    Ok(line_distance_sq(&w.w1, c.0)? + line_distance_sq(&w.w2, c.1)?)
}

/// Nearest codeword under the composite distance (ties to the lowest index).
pub fn quantize(w: &AggregatedChannel, codebook: &CompositeCodebook) -> Result<(usize, AggregatedChannel)> {
    let mut best = (usize::MAX, f64::INFINITY);
    for (j, (c1, c2)) in codebook.entries.iter().enumerate() {
        let dist = composite_distance(w, (c1, c2))?;
        if dist < best.1 {
            best = (j, dist);
        }
    }
    let (c1, c2) = codebook.entries.get(best.0).ok_or_else(|| Error::ShapeMismatch("empty codebook".into()))?;
    Ok((best.0, AggregatedChannel { w1: c1.clone(), w2: c2.clone() }))
}

fn nearest(w: &CVector, codebook: &[CVector]) -> Result<CVector> {
    let mut best = (None, f64::INFINITY);
    for c in codebook {
        let dist = line_distance_sq(w, c)?;
        if dist < best.1 {
            best = (Some(c), dist);
        }
    }
    best.0.cloned().ok_or_else(|| Error::ShapeMismatch("empty codebook".into()))
}

/// Quantizes each vector against its own codebook.
pub fn quantize_individual_with(w: &AggregatedChannel, first: &[CVector], second: &[CVector]) -> Result<AggregatedChannel> {
    Ok(AggregatedChannel { w1: nearest(&w.w1, first)?, w2: nearest(&w.w2, second)? })
}

fn split_bits(bits: u32) -> Result<u32> {
    if !bits.is_multiple_of(2) {
        return Err(Error::OddBitSplit(bits));
    }
    Ok(bits / 2)
}

/// RVQ of `w` with `2^bits` isotropic candidates drawn on the fly.
fn rvq_vector<R: Rng + ?Sized>(rng: &mut R, w: &CVector, bits: u32) -> CVector {
    let len = w.len();
    let mut cand = CVector::zeros(len);
    let mut best = (CVector::zeros(len), f64::INFINITY);
    for _ in 0..1u64 << bits {
        cand.iter_mut().for_each(|z| *z = complex_normal(rng));
        let n2 = cand.norm_squared();
        if n2 == 0.0 {
            continue;
        }
        let dist = 1.0 - w.dotc(&cand).norm_sqr() / n2;
        if dist < best.1 {
            best = (cand.unscale(n2.sqrt()), dist);
        }
    }
    best.0
}

/// Individual quantization with `bits / 2` bits per vector against fresh
/// random codebooks drawn from `rng`.
pub fn quantize_individual<R: Rng + ?Sized>(w: &AggregatedChannel, bits: u32, rng: &mut R) -> Result<AggregatedChannel> {
    let half = split_bits(bits)?;
    if half >= 40 {
        return Err(Error::BitsOverflow(bits));
    }
    Ok(AggregatedChannel { w1: rvq_vector(rng, &w.w1, half), w2: rvq_vector(rng, &w.w2, half) })
}

/// RVQ distortion predicted for a `2^bits` codebook on lines in `C^len`,
/// clipped to `[0, 1]`.
pub fn perturbation_distortion(len: usize, bits: u32) -> f64 {
    let p = ManifoldParams::new(len, 1).expect("vector length >= 2");
    quantization_bound_for(2f64.powi(bits as i32), &p).clamp(0.0, 1.0)
}

/// `ŵ = √(1−z) w + √z e` with `e` a uniform unit vector orthogonal to `w`,
/// so that `d_c²(w, ŵ) = z` exactly.
pub fn perturb_quantization_model<R: Rng + ?Sized>(w: &CVector, bits: u32, rng: &mut R) -> CVector {
    let z = perturbation_distortion(w.len(), bits);
    if z < 1e-12 {
        return w.clone();
    }
    let e = loop {
        let g = CVector::from_fn(w.len(), |_, _| complex_normal(rng));
        let perp = &g - w * w.dotc(&g);
        let n = perp.norm();
        if n > 1e-12 {
            break perp.unscale(n);
        }
    };
    w * C64::new((1.0 - z).sqrt(), 0.0) + e * C64::new(z.sqrt(), 0.0)
}

/// How the transmitters learn the aggregated channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackMode {
    /// Explicit random vector quantization, fresh codebooks per drop.
    Rvq,
    /// Statistical perturbation model of RVQ error.
    Perturbation,
}

fn devectorize(w: &CVector, nr: usize, nt: usize, norm: f64) -> CMatrix {
    CMatrix::from_column_slice(nr, nt, w.as_slice()) * C64::new(norm, 0.0)
}

/// Sum rate when precoders and receive filters are computed from the fed
/// back directions `feedback[i]` and evaluated on the true channels.
pub fn ia_rate_from_feedback(drop: &IaDrop, feedback: &[AggregatedChannel; CELLS], p: f64) -> Result<f64> {
    let (nr, nt) = drop.h[0][0].shape();
    let mut est = drop.h.clone();
    for i in 0..CELLS {
        let (a, b) = interferers(i);
        est[i][a] = devectorize(&feedback[i].w1, nr, nt, frobenius_sq(&drop.h[i][a]).sqrt());
        est[i][b] = devectorize(&feedback[i].w2, nr, nt, frobenius_sq(&drop.h[i][b]).sqrt());
    }
    let sol = closed_form_ia_from(&est)?;
    Ok(ia_sum_rate(drop, &sol, p))
}

/// Sum rate of IA with `bits` of individual-quantization feedback per receiver.
pub fn ia_limited_feedback_rate<R: Rng + ?Sized>(
    drop: &IaDrop,
    bits: u32,
    mode: FeedbackMode,
    p: f64,
    rng: &mut R,
) -> Result<f64> {
    let half = split_bits(bits)?;
    let mut feedback = Vec::with_capacity(CELLS);
    for i in 0..CELLS {
        let w = aggregate_channel(drop, i);
        feedback.push(match mode {
            FeedbackMode::Rvq => quantize_individual(&w, bits, rng)?,
            FeedbackMode::Perturbation => AggregatedChannel {
                w1: perturb_quantization_model(&w.w1, half, rng),
                w2: perturb_quantization_model(&w.w2, half, rng),
            },
        });
    }
    let feedback: [AggregatedChannel; CELLS] = feedback.try_into().expect("three receivers");
    ia_rate_from_feedback(drop, &feedback, p)
}
