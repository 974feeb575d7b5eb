use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cvsep_ffi::*;

fn tmsv(r: f64) -> [f64; 16] {
    let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    [ch, 0.0, sh, 0.0, 0.0, ch, 0.0, -sh, sh, 0.0, ch, 0.0, 0.0, -sh, 0.0, ch]
}

fn cm(entries: &[f64], dim: usize) -> *mut CvsepCovariance {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cvsep_cm_new(entries.as_ptr(), dim, &mut out) }, CvsepStatus::Ok);
    out
}

#[test]
fn covariance_handle_round_trip() {
    let h = cm(&tmsv(0.4), 4);
    let mut modes = 0;
    let mut nu = 0.0;
    let mut v = CvsepVerdict::default();
    unsafe {
        assert_eq!(cvsep_cm_modes(h, &mut modes), CvsepStatus::Ok);
        assert_eq!(cvsep_ppt_min_symplectic(h, 1, &mut nu), CvsepStatus::Ok);
        assert_eq!(cvsep_simon(h, &mut v), CvsepStatus::Ok);
        cvsep_cm_free(h);
    }
    assert_eq!(modes, 2);
    assert!((nu - (-0.8f64).exp()).abs() < 1e-12);
    assert!(v.entangled && v.margin < 0.0);
    assert!(cvsep_last_error().is_null());
}

#[test]
fn errors_set_status_and_message() {
    let mut out = ptr::null_mut();
    let bad = [0.5, 0.0, 0.0, 0.5];
    assert_eq!(unsafe { cvsep_cm_new(bad.as_ptr(), 2, &mut out) }, CvsepStatus::NotPhysical);
    assert!(out.is_null());
    let msg = unsafe { CStr::from_ptr(cvsep_last_error()) }.to_str().unwrap();
    assert!(msg.contains("physical"), "{msg}");

    assert_eq!(unsafe { cvsep_cm_new(ptr::null(), 2, &mut out) }, CvsepStatus::NullPointer);
    let odd = [1.0; 9];
    assert_eq!(unsafe { cvsep_cm_new(odd.as_ptr(), 3, &mut out) }, CvsepStatus::InvalidArgument);
    let mut v = CvsepVerdict::default();
    assert_eq!(unsafe { cvsep_simon(ptr::null(), &mut v) }, CvsepStatus::NullPointer);
    unsafe { cvsep_cm_free(ptr::null_mut()) };
}

#[test]
fn witness_and_closed_forms() {
    let mut v = CvsepVerdict::default();
    assert_eq!(unsafe { cvsep_squeezed_thermal(3.0, 3.0, 2.5, &mut v) }, CvsepStatus::Ok);
    assert!(v.entangled && (v.margin + 2.25).abs() < 1e-12);

    let h = cm(&tmsv(0.3), 4);
    let mut ratio = 0.0;
    assert_eq!(unsafe { cvsep_witness_ratio(h, &mut ratio) }, CvsepStatus::Ok);
    assert!(ratio < 1.0);

    let (adds, subs) = ([1u32, 1], [0u32, 0]);
    assert_eq!(unsafe { cvsep_photon_added(h, adds.as_ptr(), subs.as_ptr(), &mut v) }, CvsepStatus::Ok);
    assert!(v.entangled);
    // the verdict does not depend on the photon counts
    let mut w = CvsepVerdict::default();
    let more = [3u32, 0];
    assert_eq!(unsafe { cvsep_photon_added(h, more.as_ptr(), subs.as_ptr(), &mut w) }, CvsepStatus::Ok);
    assert_eq!(w.margin, v.margin);
    unsafe { cvsep_cm_free(h) };
}

#[test]
fn fock_operator_handle() {
    let detect = [2.0, 3.0, 1.5, 2.5, 0.7, -0.4];
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { cvsep_fock_new(detect.as_ptr(), 6, &mut op) }, CvsepStatus::Ok);
    let mut res = CvsepAlternation::default();
    assert_eq!(unsafe { cvsep_fock_alternate_maximize(op, 1, 100, &mut res) }, CvsepStatus::Ok);
    assert!(res.converged && res.m0 > 0.99999 && res.rounds >= 1);
    unsafe { cvsep_fock_free(op) };
}

/// Compiles a C program against the generated header and the static
/// library. Skipped when no C compiler is on the path.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    // the test binary lives in target/<profile>/deps; the staticlib one level up
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libcvsep_ffi.a");
    if !lib.exists() {
        let status = Command::new(env!("CARGO")).args(["build", "-p", "cvsep-ffi"]).status().unwrap();
        assert!(status.success());
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let out = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
