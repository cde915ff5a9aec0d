//! Small dense complex linear-algebra helpers shared by the simulator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::FRAC_1_SQRT_2;

pub use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// One circularly-symmetric complex Gaussian sample, zero mean, unit variance.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// `rows × cols` matrix with i.i.d. CN(0,1) entries, filled column-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn frobenius_sq(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `log2 det(M)` for a Hermitian positive-definite matrix, via Cholesky.
/// Returns `None` when the factorization fails.
pub fn log2_det_hpd(m: CMatrix) -> Option<f64> {
    let chol = m.cholesky()?;
    let l = chol.l_dirty();
    let ln: f64 = (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum();
    Some(2.0 * ln / std::f64::consts::LN_2)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order. Columns of the returned matrix are the matching
/// orthonormal eigenvectors.
pub fn hermitian_eigen_desc(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // Symmetrize to kill rounding asymmetry before the solver sees it.
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Deviation from Hermitian symmetry, `‖M − M^H‖_F`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    frobenius_sq(&(m - m.adjoint())).sqrt()
}

/// `‖Q^H Q − I‖_F`.
pub fn orthonormality_defect(q: &CMatrix) -> f64 {
    let g = q.adjoint() * q;
    let id = CMatrix::identity(g.nrows(), g.ncols());
    frobenius_sq(&(g - id)).sqrt()
}

/// Multiply a vector by the unit phase that makes its first non-negligible
/// entry real and positive.
pub fn normalize_phase(v: &mut CVector) {
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-300) {
        let ph = z.conj() / z.norm();
        v.iter_mut().for_each(|e| *e *= ph);
    }
}
