//! Subspaces of complex n-space and the statistics of squared chordal
//! distance on the Grassmannian G(n, d).

use nalgebra::DMatrixView;
use rand::Rng;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, gaussian_matrix, orthonormality_defect, CMatrix, C64};

/// Relative singular-value floor below which an input is rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Orthonormal basis (`n × d`) of a `d`-dimensional subspace of `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal to within `1e-10`.
    pub fn from_orthonormal(basis: CMatrix) -> Result<Self> {
        if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "subspace basis must be n x d with 1 <= d <= n, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        if orthonormality_defect(&basis) > 1e-10 {
            return Err(Error::ShapeMismatch("basis columns are not orthonormal".into()));
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> CMatrix {
        self.basis
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    /// Subspace dimension.
    pub fn d(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projector `Q Q^H`.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

/// Constants of the small-distance law `F(x) = c x^{d(n-d)}` on G(n, d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldParams {
    pub n: usize,
    pub d: usize,
    /// Ball-volume constant `c_{n,d}`.
    pub c: f64,
    /// `d (n - d)`.
    pub exponent: usize,
}

impl ManifoldParams {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d == 0 || 2 * d > n {
            return Err(Error::ShapeMismatch(format!(
                "manifold G({n},{d}) needs 1 <= d <= n/2"
            )));
        }
        let p = Self { n, d, c: ball_volume(n, d), exponent: d * (n - d) };
        debug_assert!(p.x_hat() <= d as f64 + 1e-12);
        Ok(p)
    }

    /// Upper end of the model support, solving `c x^D = 1`.
    pub fn x_hat(&self) -> f64 {
        (1.0 / self.c).powf(1.0 / self.exponent as f64)
    }

    pub fn d_f64(&self) -> f64 {
        self.d as f64
    }

    pub fn exponent_f64(&self) -> f64 {
        self.exponent as f64
    }
}

/// Orthonormalizes the columns of `m` with modified Gram-Schmidt (two
/// passes). Fails with [`Error::DegenerateChannel`] when the smallest
/// singular value is below `RANK_TOL` times the largest.
pub fn orthonormal_basis(m: &CMatrix) -> Result<Subspace> {
    orthonormal_basis_view(m.as_view())
}

pub(crate) fn orthonormal_basis_view(m: DMatrixView<'_, C64>) -> Result<Subspace> {
    let (n, d) = m.shape();
    if d == 0 || d > n {
        return Err(Error::ShapeMismatch(format!("cannot orthonormalize a {n}x{d} matrix")));
    }
    let mut q = m.into_owned();
    let mut r = CMatrix::zeros(d, d);
    for j in 0..d {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = q.column(i).dotc(&q.column(j));
                r[(i, j)] += proj;
                let qi = q.column(i).into_owned();
                q.column_mut(j).axpy(-proj, &qi, C64::new(1.0, 0.0));
            }
        }
        let norm = q.column(j).norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::DegenerateChannel);
        }
        r[(j, j)] = C64::new(norm, 0.0);
        q.column_mut(j).unscale_mut(norm);
    }
    if d > 1 {
        let sv = r.singular_values();
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
        if lo <= RANK_TOL * hi {
            return Err(Error::DegenerateChannel);
        }
    }
    Ok(Subspace { basis: q })
}

fn check_same_shape(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.n() != b.n() || a.d() != b.d() {
        return Err(Error::ShapeMismatch(format!(
            "subspaces in G({},{}) and G({},{})",
            a.n(),
            a.d(),
            b.n(),
            b.d()
        )));
    }
    Ok(())
}

/// Squared chordal distance `½ ‖A A^H − B B^H‖²_F`, in `[0, d]`.
pub fn chordal_distance_sq(a: &Subspace, b: &Subspace) -> Result<f64> {
    check_same_shape(a, b)?;
    Ok(0.5 * frobenius_sq(&(a.projector() - b.projector())))
}

/// The same distance through principal-angle cosines, `d − ‖A^H B‖²_F`.
pub fn chordal_distance_sq_overlap(a: &Subspace, b: &Subspace) -> Result<f64> {
    check_same_shape(a, b)?;
    let overlap = frobenius_sq(&(a.basis.adjoint() * &b.basis));
    Ok((a.d() as f64 - overlap).max(0.0))
}

/// Squared chordal distance between the column spans of two full-rank
/// matrices of equal shape. Single columns skip the explicit basis.
pub(crate) fn span_distance_sq(a: DMatrixView<'_, C64>, b: DMatrixView<'_, C64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    if a.ncols() == 1 {
        let (na, nb) = (a.norm_squared(), b.norm_squared());
        if !(na > 0.0 && nb > 0.0 && na.is_finite() && nb.is_finite()) {
            return Err(Error::DegenerateChannel);
        }
        let ip = a.column(0).dotc(&b.column(0)).norm_sqr();
        return Ok((1.0 - ip / (na * nb)).clamp(0.0, 1.0));
    }
    let qa = orthonormal_basis_view(a)?;
    let qb = orthonormal_basis_view(b)?;
    chordal_distance_sq_overlap(&qa, &qb)
}

/// Ball-volume constant of G(n, d):
/// `c = [1/Γ(d(n−d)+1)] ∏_{i=1..d} Γ(n−i+1)/Γ(d−i+1)`.
pub fn ball_volume(n: usize, d: usize) -> f64 {
    let big_d = (d * (n - d)) as f64;
    let mut ln_c = -ln_gamma(big_d + 1.0);
    for i in 1..=d {
        ln_c += ln_gamma((n - i + 1) as f64) - ln_gamma((d - i + 1) as f64);
    }
    ln_c.exp()
}

/// Model CDF of the squared chordal distance to an isotropic subspace.
pub fn metric_cdf(x: f64, p: &ManifoldParams) -> f64 {
    if x < 0.0 {
        0.0
    } else if x >= p.x_hat() {
        1.0
    } else {
        (p.c * x.powi(p.exponent as i32)).min(1.0)
    }
}

/// Upper bound on `E[min_k d_c²(A, C_k)]` over `k` random codewords:
/// `Γ(1/D)/D · (K c)^{−1/D}`.
pub fn quantization_bound(k: u64, p: &ManifoldParams) -> f64 {
    quantization_bound_for(k as f64, p)
}

/// [`quantization_bound`] for codebook sizes beyond `u64`.
pub fn quantization_bound_for(k: f64, p: &ManifoldParams) -> f64 {
    let big_d = p.exponent_f64();
    gamma(1.0 / big_d) / big_d * (k * p.c).powf(-1.0 / big_d)
}

/// Haar-uniform subspace of `C^n`: orthonormalized i.i.d. Gaussian matrix.
pub fn sample_uniform_subspace<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Subspace {
    assert!(d >= 1 && d <= n, "need 1 <= d <= n");
    loop {
        if let Ok(s) = orthonormal_basis(&gaussian_matrix(rng, n, d)) {
            return s;
        }
    }
}
