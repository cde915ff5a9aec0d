//! C ABI over `oia_core`.
//!
//! Every entry point returns an [`OiaStatus`] and writes results through
//! out-pointers. On failure the message of the most recent error on the
//! calling thread is available from [`oia_last_error_message`]. Panics are
//! caught at the boundary and reported as [`OiaStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use oia_core::complexity::{flop_report, FlopScheme};
use oia_core::grassmann::{self, orthonormal_basis, ManifoldParams};
use oia_core::harness::{self, Experiment, ExperimentConfig};
use oia_core::lambert::{lambert_w, Branch};
use oia_core::linalg::{CMatrix, C64};
use oia_core::oia;
use oia_core::threshold::{threshold, ThresholdMethod};
use oia_core::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OiaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateChannel = 3,
    ShapeMismatch = 4,
    LambertDomain = 5,
    TooFewUsers = 6,
    OddBitSplit = 7,
    BitsOverflow = 8,
    UnknownExperiment = 9,
    Config = 10,
    Io = 11,
    Panic = 12,
}

impl From<&Error> for OiaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DegenerateChannel => OiaStatus::DegenerateChannel,
            Error::ShapeMismatch(_) => OiaStatus::ShapeMismatch,
            Error::LambertDomain { .. } => OiaStatus::LambertDomain,
            Error::TooFewUsers { .. } => OiaStatus::TooFewUsers,
            Error::OddBitSplit(_) => OiaStatus::OddBitSplit,
            Error::BitsOverflow(_) => OiaStatus::BitsOverflow,
            Error::UnknownExperiment(_) => OiaStatus::UnknownExperiment,
            Error::Config(_) => OiaStatus::Config,
            Error::Io(_) => OiaStatus::Io,
        }
    }
}

/// Complex number laid out as two doubles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OiaComplex {
    pub re: f64,
    pub im: f64,
}

/// Opaque experiment handle.
pub struct OiaExperiment {
    cfg: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Core(Error),
    Status(OiaStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null() -> Failure {
    Failure::Status(OiaStatus::NullPointer, "null pointer argument".into())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(OiaStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OiaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OiaStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            OiaStatus::from(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            OiaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid("string is not UTF-8"))
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn handle<'a>(h: *mut OiaExperiment) -> Result<&'a mut OiaExperiment, Failure> {
    h.as_mut().ok_or_else(null)
}

fn params(nr: usize, d: usize) -> Result<ManifoldParams, Failure> {
    Ok(ManifoldParams::new(nr, d)?)
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oia_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oia_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a handle with the registered defaults of `experiment`.
///
/// # Safety
/// `experiment` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oia_experiment_new(experiment: *const c_char, out: *mut *mut OiaExperiment) -> OiaStatus {
    guard(|| {
        let e: Experiment = text(experiment)?.parse()?;
        let h = Box::new(OiaExperiment { cfg: ExperimentConfig::defaults(e) });
        write(out, Box::into_raw(h))
    })
}

/// Creates a handle from config text (`key = value` lines). `experiment`
/// may be null when the text names it.
///
/// # Safety
/// String arguments must be NUL-terminated or (for `experiment`) null;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oia_experiment_from_config(
    experiment: *const c_char,
    config: *const c_char,
    out: *mut *mut OiaExperiment,
) -> OiaStatus {
    guard(|| {
        let e = if experiment.is_null() { None } else { Some(text(experiment)?.parse::<Experiment>()?) };
        let cfg = ExperimentConfig::parse(text(config)?, e)?;
        write(out, Box::into_raw(Box::new(OiaExperiment { cfg })))
    })
}

/// # Safety
/// `h` must come from `oia_experiment_new`/`oia_experiment_from_config`.
#[no_mangle]
pub unsafe extern "C" fn oia_experiment_set_seed(h: *mut OiaExperiment, seed: u64) -> OiaStatus {
    guard(|| {
        handle(h)?.cfg.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oia_experiment_set_trials(h: *mut OiaExperiment, trials: usize) -> OiaStatus {
    guard(|| {
        if trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        handle(h)?.cfg.trials = trials;
        Ok(())
    })
}

/// Runs the experiment and writes its CSV to `path` (temp file + rename).
///
/// # Safety
/// `h` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn oia_experiment_run_to_csv(h: *mut OiaExperiment, path: *const c_char) -> OiaStatus {
    guard(|| {
        let h = handle(h)?;
        let cfg = ExperimentConfig { output_path: Some(PathBuf::from(text(path)?)), ..h.cfg.clone() };
        harness::run_to_csv(&cfg, false)?;
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn oia_experiment_free(h: *mut OiaExperiment) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// 1-bit feedback threshold. `method` is one of `closed_form_d1`,
/// `lambert`, `asymptotic`, `numeric`.
///
/// # Safety
/// `method` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oia_threshold(
    method: *const c_char,
    nr: usize,
    d: usize,
    k: u64,
    out: *mut f64,
) -> OiaStatus {
    guard(|| {
        let m: ThresholdMethod = text(method)?.parse()?;
        write(out, threshold(m, k, &params(nr, d)?)?.x)
    })
}

/// Lambert W on branch 0 or -1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oia_lambert_w(branch: i32, z: f64, out: *mut f64) -> OiaStatus {
    guard(|| {
        let b = Branch::from_index(branch).ok_or_else(|| invalid(format!("branch must be 0 or -1, got {branch}")))?;
        write(out, lambert_w(b, z)?)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oia_ball_volume(n: usize, d: usize, out: *mut f64) -> OiaStatus {
    guard(|| write(out, params(n, d)?.c))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oia_metric_cdf(x: f64, n: usize, d: usize, out: *mut f64) -> OiaStatus {
    guard(|| write(out, grassmann::metric_cdf(x, &params(n, d)?)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oia_outage_probability(x: f64, k: u64, n: usize, d: usize, out: *mut f64) -> OiaStatus {
    guard(|| write(out, oia::outage_probability(x, k, &params(n, d)?)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oia_expected_metric_one_bit(x: f64, k: u64, n: usize, d: usize, out: *mut f64) -> OiaStatus {
    guard(|| write(out, oia::expected_metric_one_bit(x, k, &params(n, d)?)))
}

unsafe fn matrix(p: *const OiaComplex, n: usize, d: usize) -> Result<CMatrix, Failure> {
    if p.is_null() {
        return Err(null());
    }
    let len = n.checked_mul(d).ok_or_else(|| invalid("matrix too large"))?;
    let s = std::slice::from_raw_parts(p, len);
    Ok(CMatrix::from_iterator(n, d, s.iter().map(|z| C64::new(z.re, z.im))))
}

/// Squared chordal distance between the column spans of two `n × d`
/// column-major matrices (any full-rank bases).
///
/// # Safety
/// `a` and `b` must each point to `n * d` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oia_chordal_distance_sq(
    a: *const OiaComplex,
    b: *const OiaComplex,
    n: usize,
    d: usize,
    out: *mut f64,
) -> OiaStatus {
    guard(|| {
        if d == 0 || d > n {
            return Err(invalid(format!("need 1 <= d <= n, got n={n}, d={d}")));
        }
        let a = orthonormal_basis(&matrix(a, n, d)?)?;
        let b = orthonormal_basis(&matrix(b, n, d)?)?;
        write(out, grassmann::chordal_distance_sq(&a, &b)?)
    })
}

/// FLOPs per cell for `scheme` (`oia_1bit`, `ia_joint`, `ia_individual`).
/// `second` is `d` for OIA and `nt` for IA.
///
/// # Safety
/// `scheme` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oia_flops(
    scheme: *const c_char,
    nr: u64,
    second: u64,
    n_bits: u32,
    out: *mut u64,
) -> OiaStatus {
    guard(|| {
        let name = text(scheme)?;
        let s = FlopScheme::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| invalid(format!("unknown scheme `{name}`")))?;
        write(out, flop_report(s, nr, second, n_bits)?.flops)
    })
}
