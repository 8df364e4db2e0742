//! C ABI over the rate and Gaussian steady-state solvers.
//!
//! Parameters live behind an opaque handle created from TOML text. Every
//! function returns an [`OptospinStatus`]; on failure the message is available
//! from [`optospin_last_error`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use optospin::config::Config;
use optospin::gaussian::{self, HamiltonianChoice, Mode};
use optospin::params::PhysicalParams;
use optospin::rates;
use optospin::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptospinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidParameter = 4,
    Unstable = 5,
    Numerical = 6,
    Panic = 7,
}

/// Opaque parameter set.
pub struct OptospinParams {
    params: PhysicalParams,
}

/// Rates in rad/s; cooperativities dimensionless.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OptospinRates {
    pub g_m: f64,
    pub g_at: f64,
    pub g_eff: f64,
    pub gamma_m_diff: f64,
    pub gamma_at_diff: f64,
    pub gamma_m_th: f64,
    pub gamma_at_cool: f64,
    pub omega_ol: f64,
    pub coop_c0: f64,
    pub coop_c: f64,
}

/// Steady-state occupations of the two modes.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OptospinOccupations {
    pub mechanics: f64,
    pub spin: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> OptospinStatus {
    match err {
        Error::Config(_) | Error::Io { .. } => OptospinStatus::Config,
        Error::InvalidParameter { .. } | Error::RwaOutOfRange { .. } => OptospinStatus::InvalidParameter,
        Error::Unstable { .. } => OptospinStatus::Unstable,
        _ => OptospinStatus::Numerical,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), (OptospinStatus, String)>) -> OptospinStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OptospinStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            OptospinStatus::Panic
        }
    }
}

fn lift<T>(r: optospin::Result<T>) -> Result<T, (OptospinStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (OptospinStatus, String) {
    (OptospinStatus::NullPointer, format!("{what} is null"))
}

/// Parses TOML text into a new parameter handle.
///
/// # Safety
/// `toml` must be a valid NUL-terminated string and `out` a valid pointer.
/// The handle written to `out` must be released with [`optospin_params_free`].
#[no_mangle]
pub unsafe extern "C" fn optospin_params_from_toml(toml: *const c_char, out: *mut *mut OptospinParams) -> OptospinStatus {
    guarded(|| {
        if toml.is_null() {
            return Err(null("toml"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(toml) }
            .to_str()
            .map_err(|e| (OptospinStatus::InvalidUtf8, e.to_string()))?;
        let config = lift(Config::from_toml_str(text))?;
        let handle = Box::new(OptospinParams { params: config.params });
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `params` must come from [`optospin_params_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn optospin_params_free(params: *mut OptospinParams) {
    if !params.is_null() {
        // SAFETY: the caller passes a pointer obtained from Box::into_raw.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Sets the laser operating point (W, rad/s, m).
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn optospin_params_set_operating_point(
    params: *mut OptospinParams,
    power_w: f64,
    detuning: f64,
    waist_w0: f64,
) -> OptospinStatus {
    guarded(|| {
        // SAFETY: the caller guarantees a live handle or null.
        let handle = unsafe { params.as_mut() }.ok_or_else(|| null("params"))?;
        let updated = handle.params.with_operating_point(power_w, detuning, waist_w0);
        lift(updated.validate())?;
        handle.params = updated;
        Ok(())
    })
}

/// Computes every rate at the handle's operating point.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn optospin_compute_rates(params: *const OptospinParams, out: *mut OptospinRates) -> OptospinStatus {
    guarded(|| {
        // SAFETY: the caller guarantees a live handle or null.
        let handle = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = lift(rates::compute_rates(&handle.params))?;
        let value = OptospinRates {
            g_m: r.g_m,
            g_at: r.g_at,
            g_eff: r.g_eff,
            gamma_m_diff: r.gamma_m_diff,
            gamma_at_diff: r.gamma_at_diff,
            gamma_m_th: r.gamma_m_th,
            gamma_at_cool: r.gamma_at_cool,
            omega_ol: r.omega_ol,
            coop_c0: r.coop_c0,
            coop_c: r.coop_c,
        };
        // SAFETY: checked non-null.
        unsafe { *out = value };
        Ok(())
    })
}

/// Gaussian steady state with the full quadrature coupling at resonance.
/// A negative `g_eff` or `gamma_at_cool` keeps the value computed from the parameters.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn optospin_steady_state(
    params: *const OptospinParams,
    g_eff: f64,
    gamma_at_cool: f64,
    out: *mut OptospinOccupations,
) -> OptospinStatus {
    guarded(|| {
        // SAFETY: the caller guarantees a live handle or null.
        let handle = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &handle.params;
        let mut r = lift(rates::compute_rates(p))?;
        if gamma_at_cool >= 0.0 {
            r = r.with_cooling(gamma_at_cool);
        }
        if g_eff >= 0.0 {
            r = r.with_coupling(g_eff);
        }
        let h = lift(HamiltonianChoice::full_quadrature(p.mechanics.omega_m, 0.0))?;
        let n_bath = rates::thermal_occupation(&p.mechanics, p.laser.power_w);
        let model = lift(gaussian::build_model(&h, &r, n_bath))?;
        let state = lift(gaussian::steady_state(&model))?;
        let value = OptospinOccupations {
            mechanics: lift(gaussian::occupation(&state, Mode::Mechanics))?,
            spin: lift(gaussian::occupation(&state, Mode::Spin))?,
        };
        // SAFETY: checked non-null.
        unsafe { *out = value };
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn optospin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn optospin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
