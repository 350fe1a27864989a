use std::ffi::{CStr, CString};
use std::ptr;

use weyl_alf_ffi::*;

const KALUZA: &str = r#"{
  "model": {"m": 3, "radius": 1.0, "fiber_length": 6.283185307179586, "fibration": "trivial"},
  "metric": {"family": "kaluza_perturbation", "mu": 1.0},
  "lee": {"kind": "zero"}
}"#;

fn handle(json: &str) -> *mut WaWeyl {
    let c = CString::new(json).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { wa_weyl_new(c.as_ptr(), &mut h) }, WaStatus::WaOk, "{}", last_error());
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let mut buf = vec![0 as libc::c_char; 256];
    let n = unsafe { wa_last_error(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn metric_and_dimension() {
    let h = handle(KALUZA);
    let mut n = 0usize;
    assert_eq!(unsafe { wa_weyl_dim(h, &mut n) }, WaStatus::WaOk);
    assert_eq!(n, 4);
    let p = [2.0, 0.0, 0.0, 0.1];
    let mut g = [0.0; 16];
    assert_eq!(unsafe { wa_metric_at(h, p.as_ptr(), 4, g.as_mut_ptr(), 16) }, WaStatus::WaOk);
    // (1 + 2μ/r) on the base, 1 on the fiber
    assert!((g[0] - 2.0).abs() < 1e-14);
    assert!((g[15] - 1.0).abs() < 1e-14);
    assert_eq!(g[1], 0.0);
    let mut small = [0.0; 4];
    assert_eq!(
        unsafe { wa_metric_at(h, p.as_ptr(), 4, small.as_mut_ptr(), 4) },
        WaStatus::WaBufferTooSmall
    );
    unsafe { wa_weyl_free(h) };
}

#[test]
fn domain_errors_are_reported() {
    let h = handle(KALUZA);
    let p = [0.5, 0.0, 0.0, 0.0];
    let mut g = [0.0; 16];
    assert_eq!(unsafe { wa_metric_at(h, p.as_ptr(), 4, g.as_mut_ptr(), 16) }, WaStatus::WaDomain);
    assert!(last_error().contains("excised"));
    unsafe { wa_weyl_free(h) };
}

#[test]
fn null_and_bad_input() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { wa_weyl_new(ptr::null(), &mut h) }, WaStatus::WaNullPointer);
    let bad = CString::new("{\"model\": 3}").unwrap();
    assert_eq!(unsafe { wa_weyl_new(bad.as_ptr(), &mut h) }, WaStatus::WaConfig);
    assert!(h.is_null());
    let mut n = 0usize;
    assert_eq!(unsafe { wa_weyl_dim(ptr::null(), &mut n) }, WaStatus::WaNullPointer);
    unsafe { wa_weyl_free(ptr::null_mut()) };
    unsafe { wa_string_free(ptr::null_mut()) };
}

#[test]
fn kaluza_mass() {
    let h = handle(KALUZA);
    let z = [1.0, 0.0, 0.0];
    let radii = [50.0, 100.0, 200.0, 400.0];
    let (mut mass, mut conv) = (0.0, 0);
    let st = unsafe { wa_mass(h, z.as_ptr(), 3, radii.as_ptr(), 4, 0, &mut mass, &mut conv) };
    assert_eq!(st, WaStatus::WaOk, "{}", last_error());
    assert_eq!(conv, 1);
    assert!((mass - 4.0 / 3.0).abs() < 1e-6, "{mass}");
    unsafe { wa_weyl_free(h) };
}

#[test]
fn bochner_sign() {
    let json = r#"{
      "model": {"m": 3, "radius": 1.0, "fiber_length": 4.0, "fibration": "hopf"},
      "metric": {"family": "hopf_model", "mu": 0.5},
      "lee": {"kind": "random_trig", "seed": 9, "amplitude": 1.0}
    }"#;
    let h = handle(json);
    let p = [1.7, -0.4, 0.9, 0.3];
    let (mut plus, mut minus) = (0.0, 0.0);
    let st = unsafe { wa_bochner_residuals(h, p.as_ptr(), 4, -0.5, 3, &mut plus, &mut minus) };
    assert_eq!(st, WaStatus::WaOk, "{}", last_error());
    assert!(plus < 1e-10, "{plus}");
    assert!(minus > 1e-6, "{minus}");
    unsafe { wa_weyl_free(h) };
}

#[test]
fn verify_round_trip() {
    let toml = CString::new("[verify]\ntrials = 4\nsign_trials = 4\nintegral_triples = 0\n").unwrap();
    let mut pass = 0;
    let mut json = ptr::null_mut();
    let st = unsafe { wa_verify(toml.as_ptr(), 7, &mut pass, &mut json) };
    assert_eq!(st, WaStatus::WaOk, "{}", last_error());
    assert_eq!(pass, 1);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { wa_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.as_array().unwrap().len() >= 7);
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(wa_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_lists_entry_points() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/weyl_alf.h")).unwrap();
    for f in ["wa_weyl_new", "wa_weyl_free", "wa_mass", "wa_verify", "wa_last_error", "WA_DECAY_PROBE"] {
        assert!(h.contains(f), "{f} missing from header");
    }
}
