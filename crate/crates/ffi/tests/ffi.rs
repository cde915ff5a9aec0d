use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use oia_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(oia_last_error_message()) }.to_string_lossy().into_owned()
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(oia_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn scalar_entry_points() {
    let mut x = f64::NAN;
    unsafe {
        assert_eq!(oia_threshold(c("closed_form_d1").as_ptr(), 2, 1, 10, &mut x), OiaStatus::Ok);
        assert!((x - (1.0 - 0.1f64.powf(1.0 / 9.0))).abs() < 1e-14);

        assert_eq!(oia_lambert_w(-1, -0.1, &mut x), OiaStatus::Ok);
        assert!((x - -3.577152063957297).abs() < 1e-12);
        assert_eq!(oia_lambert_w(0, 1.0, &mut x), OiaStatus::Ok);
        assert!((x - 0.5671432904097838).abs() < 1e-14);

        assert_eq!(oia_ball_volume(4, 2, &mut x), OiaStatus::Ok);
        assert!((x - 0.5).abs() < 1e-12);
        assert_eq!(oia_metric_cdf(0.5, 2, 1, &mut x), OiaStatus::Ok);
        assert!((x - 0.5).abs() < 1e-15);
        assert_eq!(oia_outage_probability(0.5, 2, 2, 1, &mut x), OiaStatus::Ok);
        assert!((x - 0.25).abs() < 1e-15);
        assert_eq!(oia_expected_metric_one_bit(0.5, 2, 2, 1, &mut x), OiaStatus::Ok);
        assert!((x - 0.375).abs() < 1e-12);

        let mut f = 0u64;
        assert_eq!(oia_flops(c("ia_individual").as_ptr(), 2, 2, 10, &mut f), OiaStatus::Ok);
        assert_eq!(f, 7680);
        assert_eq!(oia_flops(c("oia_1bit").as_ptr(), 2, 1, 10, &mut f), OiaStatus::Ok);
        assert_eq!(f, 600);
    }
}

#[test]
fn chordal_distance_on_raw_arrays() {
    let z = |re: f64| OiaComplex { re, im: 0.0 };
    let e1 = [z(1.0), z(0.0)];
    let e2 = [z(0.0), z(3.0)];
    let mut x = f64::NAN;
    unsafe {
        assert_eq!(oia_chordal_distance_sq(e1.as_ptr(), e2.as_ptr(), 2, 1, &mut x), OiaStatus::Ok);
        assert!((x - 1.0).abs() < 1e-15);
        assert_eq!(oia_chordal_distance_sq(e1.as_ptr(), e1.as_ptr(), 2, 1, &mut x), OiaStatus::Ok);
        assert!(x.abs() < 1e-15);
        let zero = [z(0.0), z(0.0)];
        assert_eq!(oia_chordal_distance_sq(zero.as_ptr(), e1.as_ptr(), 2, 1, &mut x), OiaStatus::DegenerateChannel);
        assert_eq!(oia_chordal_distance_sq(e1.as_ptr(), e1.as_ptr(), 2, 0, &mut x), OiaStatus::InvalidArgument);
    }
}

#[test]
fn errors_map_to_codes_and_messages() {
    let mut x = 0.0;
    unsafe {
        assert_eq!(oia_lambert_w(-1, 0.5, &mut x), OiaStatus::LambertDomain);
        assert!(last_error().contains("Lambert"));
        assert_eq!(oia_lambert_w(3, 0.5, &mut x), OiaStatus::InvalidArgument);
        assert_eq!(oia_threshold(c("lambert").as_ptr(), 4, 2, 2, &mut x), OiaStatus::TooFewUsers);
        assert_eq!(oia_threshold(c("magic").as_ptr(), 2, 1, 2, &mut x), OiaStatus::Config);
        assert_eq!(oia_threshold(ptr::null(), 2, 1, 2, &mut x), OiaStatus::NullPointer);
        assert_eq!(oia_threshold(c("numeric").as_ptr(), 2, 1, 2, ptr::null_mut()), OiaStatus::NullPointer);
        let mut f = 0u64;
        assert_eq!(oia_flops(c("ia_individual").as_ptr(), 2, 2, 11, &mut f), OiaStatus::OddBitSplit);
        assert_eq!(oia_flops(c("ia_joint").as_ptr(), 2, 2, 63, &mut f), OiaStatus::BitsOverflow);
        let mut h: *mut OiaExperiment = ptr::null_mut();
        assert_eq!(oia_experiment_new(c("fig9").as_ptr(), &mut h), OiaStatus::UnknownExperiment);
        assert!(h.is_null());
    }
}

fn run_csv(h: *mut OiaExperiment, path: &Path) -> String {
    let p = c(path.to_str().unwrap());
    assert_eq!(unsafe { oia_experiment_run_to_csv(h, p.as_ptr()) }, OiaStatus::Ok, "{}", last_error());
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn experiment_handle_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = c("experiment = fig2_sumrate_d1\nsnr_db_grid = 0, 10\ntrials = 50\n");
    let mut h: *mut OiaExperiment = ptr::null_mut();
    unsafe {
        assert_eq!(oia_experiment_from_config(ptr::null(), cfg.as_ptr(), &mut h), OiaStatus::Ok);
        assert_eq!(oia_experiment_set_seed(h, 11), OiaStatus::Ok);
        assert_eq!(oia_experiment_set_trials(h, 4), OiaStatus::Ok);
        assert_eq!(oia_experiment_set_trials(h, 0), OiaStatus::InvalidArgument);
    }
    let a = run_csv(h, &dir.path().join("a.csv"));
    let b = run_csv(h, &dir.path().join("b.csv"));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 2 * 3);
    assert!(a.lines().skip(1).all(|l| l.ends_with(",4")));

    let missing = c(dir.path().join("none/x.csv").to_str().unwrap());
    unsafe {
        assert_eq!(oia_experiment_run_to_csv(h, missing.as_ptr()), OiaStatus::Io);
        assert_eq!(oia_experiment_set_seed(ptr::null_mut(), 1), OiaStatus::NullPointer);
        oia_experiment_free(h);
        oia_experiment_free(ptr::null_mut());

        let bad = c("trials = 0\n");
        let mut h2: *mut OiaExperiment = ptr::null_mut();
        assert_eq!(oia_experiment_from_config(c("fig2_sumrate_d1").as_ptr(), bad.as_ptr(), &mut h2), OiaStatus::Config);
        assert_eq!(oia_experiment_new(c("fig7_complexity_table").as_ptr(), &mut h2), OiaStatus::Ok);
        let table = run_csv(h2, &dir.path().join("t.csv"));
        assert!(table.contains("fig7_complexity_table,10,ia_individual,7680"));
        oia_experiment_free(h2);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/oia.h")
}

#[test]
fn header_declares_every_entry_point() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "oia_last_error_message",
        "oia_version",
        "oia_experiment_new",
        "oia_experiment_from_config",
        "oia_experiment_set_seed",
        "oia_experiment_set_trials",
        "oia_experiment_run_to_csv",
        "oia_experiment_free",
        "oia_threshold",
        "oia_lambert_w",
        "oia_ball_volume",
        "oia_metric_cdf",
        "oia_outage_probability",
        "oia_expected_metric_one_bit",
        "oia_chordal_distance_sq",
        "oia_flops",
        "OIA_STATUS_OK",
        "typedef struct OiaExperiment OiaExperiment",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "oia.h"

int main(void) {
    double x = 0.0;
    uint64_t f = 0;
    if (oia_threshold("closed_form_d1", 2, 1, 10, &x) != OIA_STATUS_OK) return 1;
    if (oia_flops("ia_individual", 2, 2, 10, &f) != OIA_STATUS_OK) return 2;
    if (oia_lambert_w(-1, 0.5, &x) != OIA_STATUS_LAMBERT_DOMAIN) return 3;
    OiaExperiment *h = NULL;
    if (oia_experiment_new("fig4_threshold_compare", &h) != OIA_STATUS_OK) return 4;
    oia_experiment_free(h);
    printf("%llu %s\n", (unsigned long long)f, oia_version());
    return 0;
}
"#;

/// Compiles a C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("liboia_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("7680 {}", env!("CARGO_PKG_VERSION")));
}
