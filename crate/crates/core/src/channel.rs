//! Three-cell MIMO interference channel: channel draws, the per-user
//! alignment metric, eigen postfilter and achievable rate.

use nalgebra::DMatrixView;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grassmann::span_distance_sq;
use crate::linalg::{complex_normal, hermitian_eigen_desc, log2_det_hpd, CMatrix, C64};

pub const CELLS: usize = 3;

/// Indices `(p, q)` of the two transmitters interfering at cell `i`.
#[inline]
pub fn interferers(i: usize) -> (usize, usize) {
    ((i + 1) % CELLS, (i + 2) % CELLS)
}

/// Antenna dimensions, user count and transmit power of one system.
///
/// Receivers carry `2d` antennas and transmitters `d`, the smallest setup
/// that leaves room for `d` interference-free dimensions once the two
/// interferers align. Noise has unit variance, so `p` is the SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub d: usize,
    pub nr: usize,
    pub nt: usize,
    pub k: usize,
    pub p: f64,
}

impl SystemConfig {
    pub fn new(d: usize, k: usize, p: f64) -> Result<Self> {
        let cfg = Self { d, nr: 2 * d, nt: d, k, p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.nr != 2 * self.d || self.nt != self.d {
            return Err(Error::Config(format!(
                "need nr = 2d and nt = d, got d={} nr={} nt={}",
                self.d, self.nr, self.nt
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("power must be positive, got {}", self.p)));
        }
        Ok(())
    }

    pub fn with_power(self, p: f64) -> Self {
        Self { p, ..self }
    }
}

/// All `9K` channel matrices `H_{i,j}^k` of one drop, stored contiguously
/// in column-major blocks of `nr × nt`, user index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    nr: usize,
    nt: usize,
    k: usize,
    data: Vec<C64>,
}

impl ChannelSet {
    fn block(&self) -> usize {
        self.nr * self.nt
    }

    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        assert!(i < CELLS && j < CELLS && k < self.k, "channel index out of range");
        ((k * CELLS + i) * CELLS + j) * self.block()
    }

    /// All-zero channel set, for engineered scenarios.
    pub fn zeros(cfg: &SystemConfig) -> Self {
        Self { nr: cfg.nr, nt: cfg.nt, k: cfg.k, data: vec![C64::new(0.0, 0.0); CELLS * CELLS * cfg.k * cfg.nr * cfg.nt] }
    }

    pub fn users(&self) -> usize {
        self.k
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Channel from transmitter `j` to user `k` of cell `i` (all 0-based).
    pub fn h(&self, i: usize, j: usize, k: usize) -> DMatrixView<'_, C64> {
        let o = self.offset(i, j, k);
        DMatrixView::from_slice(&self.data[o..o + self.block()], self.nr, self.nt)
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, m: &CMatrix) {
        assert_eq!(m.shape(), (self.nr, self.nt), "channel block shape");
        let o = self.offset(i, j, k);
        let b = self.block();
        self.data[o..o + b].copy_from_slice(m.as_slice());
    }

    /// Every complex entry, in storage order.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }
}

/// Draws every entry i.i.d. CN(0, 1), user by user: the first `K'` users
/// of a `K`-user drop equal a `K'`-user drop from the same rng state.
pub fn generate_channels<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> ChannelSet {
    let mut ch = ChannelSet::zeros(cfg);
    ch.data.iter_mut().for_each(|z| *z = complex_normal(rng));
    ch
}

/// Squared chordal distance between the spans of the two interference
/// channels seen by user `k` of cell `i`.
pub fn user_metric(ch: &ChannelSet, i: usize, k: usize) -> Result<f64> {
    let (p, q) = interferers(i);
    span_distance_sq(ch.h(i, p, k), ch.h(i, q, k))
}

/// `R = H_ip H_ip^H + H_iq H_iq^H`.
pub fn interference_covariance(ch: &ChannelSet, i: usize, k: usize) -> CMatrix {
    let (p, q) = interferers(i);
    let (hp, hq) = (ch.h(i, p, k), ch.h(i, q, k));
    hp * hp.adjoint() + hq * hq.adjoint()
}

/// Receive filter spanning the eigenvectors of `r` for its `d` smallest
/// eigenvalues (positions `d+1 ..= 2d` in descending order).
pub fn postfilter(r: &CMatrix, d: usize) -> CMatrix {
    let n = r.nrows();
    assert!(d >= 1 && d <= n, "postfilter dimension");
    let (_, vecs) = hermitian_eigen_desc(r);
    vecs.columns(n - d, d).into_owned()
}

/// Achievable rate of the user served in one cell, with its decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRecord {
    pub cell: usize,
    pub user: usize,
    /// bits per channel use
    pub rate: f64,
    pub rate_gain: f64,
    pub rate_loss: f64,
    pub metric: f64,
    pub outage: bool,
}

/// Rate of user `k` in cell `i` behind receive filter `u` (`nr × d`).
///
/// `rate` comes from the SINR-form determinant; `rate_gain` and
/// `rate_loss` from the signal-plus-interference and interference-only
/// covariances. The two routes agree to rounding.
pub fn user_rate(ch: &ChannelSet, i: usize, k: usize, u: &CMatrix, cfg: &SystemConfig) -> Result<RateRecord> {
    let d = cfg.d;
    if u.shape() != (ch.nr, d) {
        return Err(Error::ShapeMismatch(format!("postfilter must be {}x{d}, got {:?}", ch.nr, u.shape())));
    }
    let scale = C64::new(cfg.p / d as f64, 0.0);
    let uh = u.adjoint();
    let gram = |j: usize| {
        let e = &uh * ch.h(i, j, k);
        &e * e.adjoint() * scale
    };
    let signal = gram(i);
    let (p, q) = interferers(i);
    let noise_plus_interf = CMatrix::identity(d, d) + gram(p) + gram(q);

    let inv = noise_plus_interf.clone().try_inverse().ok_or(Error::DegenerateChannel)?;
    let sinr = CMatrix::identity(d, d) + &signal * inv;
    let rate = sinr.determinant().re.log2();

    let rate_gain = log2_det_hpd(&noise_plus_interf + &signal).ok_or(Error::DegenerateChannel)?;
    let rate_loss = log2_det_hpd(noise_plus_interf).ok_or(Error::DegenerateChannel)?;
    Ok(RateRecord {
        cell: i,
        user: k,
        rate,
        rate_gain,
        rate_loss: rate_loss.max(0.0),
        metric: user_metric(ch, i, k)?,
        outage: false,
    })
}
