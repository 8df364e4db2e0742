use std::ffi::{CStr, CString};
use std::ptr;

use optospin_ffi::*;

const ZIPPER: &str = include_str!("../../../configs/zipper.toml");

fn handle() -> *mut OptospinParams {
    let text = CString::new(ZIPPER).unwrap();
    let mut h = ptr::null_mut();
    let status = unsafe { optospin_params_from_toml(text.as_ptr(), &mut h) };
    assert_eq!(status, OptospinStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = optospin_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn rates_round_trip() {
    let h = handle();
    let mut r = OptospinRates::default();
    assert_eq!(unsafe { optospin_compute_rates(h, &mut r) }, OptospinStatus::Ok);
    let khz = r.gamma_m_th / (2.0 * std::f64::consts::PI) / 1e3;
    assert!((khz / 844.0 - 1.0).abs() < 0.05);
    assert!(optospin_last_error().is_null());
    unsafe { optospin_params_free(h) };
}

#[test]
fn steady_state_with_cooling() {
    let h = handle();
    let mut occ = OptospinOccupations::default();
    let g = 2.0 * std::f64::consts::PI * 2.5e6;
    assert_eq!(unsafe { optospin_steady_state(h, g, 2e7, &mut occ) }, OptospinStatus::Ok);
    assert!(occ.mechanics > 0.0 && occ.mechanics < 1.0);
    let too_strong = 2.0 * std::f64::consts::PI * 20e6;
    assert_eq!(unsafe { optospin_steady_state(h, too_strong, 0.0, &mut occ) }, OptospinStatus::Unstable);
    assert!(last_error().contains("not stable"));
    unsafe { optospin_params_free(h) };
}

#[test]
fn errors_are_reported() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { optospin_params_from_toml(ptr::null(), &mut h) }, OptospinStatus::NullPointer);
    let bad = CString::new("[laser]\npower_W = 1").unwrap();
    assert_eq!(unsafe { optospin_params_from_toml(bad.as_ptr(), &mut h) }, OptospinStatus::Config);
    assert!(!last_error().is_empty());
    assert!(h.is_null());
    let mut r = OptospinRates::default();
    assert_eq!(unsafe { optospin_compute_rates(ptr::null(), &mut r) }, OptospinStatus::NullPointer);

    let h = handle();
    assert_eq!(unsafe { optospin_params_set_operating_point(h, -1.0, 1e8, 3e-5) }, OptospinStatus::InvalidParameter);
    assert_eq!(unsafe { optospin_params_set_operating_point(h, 1e-6, 1e8, 3e-5) }, OptospinStatus::Ok);
    unsafe { optospin_params_free(h) };
    unsafe { optospin_params_free(ptr::null_mut()) };
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(optospin_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/optospin.h")).unwrap();
    for name in ["optospin_params_from_toml", "optospin_compute_rates", "optospin_steady_state", "OPTOSPIN_STATUS_OK"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
