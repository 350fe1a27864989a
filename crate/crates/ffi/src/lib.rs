//! C ABI over the weyl-alf engine.
//!
//! Handles are opaque and owned by the caller; every function returns a
//! `WaStatus` and never unwinds across the boundary. The message of the last
//! error on the calling thread is available through `wa_last_error`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, c_int, size_t};
use serde::Deserialize;

use weyl_alf::chart::{eval_metric, DerivativeEngine, FormSpec, LeeSpec, MetricSpec, ModelSpace};
use weyl_alf::config::{Overrides, RunConfig};
use weyl_alf::identities::{bochner_terms, run_suite};
use weyl_alf::mass::{conformal_mass, riemannian_mass_q, MassQuery};
use weyl_alf::weyl::WeylStructure;
use weyl_alf::Error;

/// Result codes. `WA_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaStatus {
    WaOk = 0,
    WaNullPointer = 1,
    WaInvalidUtf8 = 2,
    WaConfig = 3,
    WaDomain = 4,
    WaDecayProbe = 5,
    WaNotAdapted = 6,
    WaNumerical = 7,
    WaBufferTooSmall = 8,
    WaPanic = 9,
}

/// A Weyl structure on a model space.
pub struct WaWeyl {
    inner: WeylStructure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WaStatus {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::DimensionMismatch { .. } | Error::Degree(_) => WaStatus::WaConfig,
        Error::Domain(_) => WaStatus::WaDomain,
        Error::DecayProbe { .. } => WaStatus::WaDecayProbe,
        Error::NotAdapted(_) => WaStatus::WaNotAdapted,
        Error::SingularMetric(_) | Error::Contract(_) | Error::GaugeMismatch { .. } => WaStatus::WaNumerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (WaStatus, String)>) -> WaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WaStatus::WaOk,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            WaStatus::WaPanic
        }
    }
}

fn lift<T>(r: weyl_alf::Result<T>) -> Result<T, (WaStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (WaStatus, String) {
    (WaStatus::WaNullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (WaStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (WaStatus::WaInvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn read_slice<'a>(p: *const f64, len: size_t, what: &str) -> Result<&'a [f64], (WaStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureJson {
    model: ModelSpace,
    metric: MetricSpec,
    #[serde(default = "zero_lee")]
    lee: LeeSpec,
}

fn zero_lee() -> LeeSpec {
    LeeSpec::Zero
}

/// Build a Weyl structure from JSON `{"model": …, "metric": …, "lee": …}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wa_weyl_new(json: *const c_char, out: *mut *mut WaWeyl) -> WaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let spec: StructureJson = lift(serde_json::from_str(text).map_err(Error::from))?;
        let inner = lift(WeylStructure::new(spec.model, spec.metric, spec.lee))?;
        *out = Box::into_raw(Box::new(WaWeyl { inner }));
        Ok(())
    })
}

/// Release a handle from `wa_weyl_new`. Null is ignored.
///
/// # Safety
/// `w` must come from `wa_weyl_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wa_weyl_free(w: *mut WaWeyl) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Dimension `n = m + 1` of the total space.
///
/// # Safety
/// `w` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wa_weyl_dim(w: *const WaWeyl, out: *mut size_t) -> WaStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = w.inner.model.dim();
        Ok(())
    })
}

/// Frame components `g_ab` at `point` (length `n`) into `out` (length `n²`).
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn wa_metric_at(
    w: *const WaWeyl,
    point: *const f64,
    point_len: size_t,
    out: *mut f64,
    out_len: size_t,
) -> WaStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("handle"))?;
        let n = w.inner.model.dim();
        let p = read_slice(point, point_len, "point")?;
        if p.len() != n {
            return Err((WaStatus::WaConfig, format!("point needs {n} coordinates")));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len < n * n {
            return Err((WaStatus::WaBufferTooSmall, format!("out needs {} entries", n * n)));
        }
        let g = lift(eval_metric(&w.inner.model, &w.inner.metric, p))?;
        std::slice::from_raw_parts_mut(out, n * n).copy_from_slice(g.components());
        Ok(())
    })
}

/// Mass of `Z = Σ z_b X_b` over the given radii: `Q_g` when `conformal` is 0,
/// the conformal mass otherwise. Decay probes gate the computation.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn wa_mass(
    w: *const WaWeyl,
    z: *const f64,
    z_len: size_t,
    radii: *const f64,
    radii_len: size_t,
    conformal: c_int,
    out_mass: *mut f64,
    out_converged: *mut c_int,
) -> WaStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("handle"))?;
        let z = read_slice(z, z_len, "z")?;
        let radii = read_slice(radii, radii_len, "radii")?;
        if out_mass.is_null() || out_converged.is_null() {
            return Err(null("output"));
        }
        let q = MassQuery::new(w.inner.clone(), z.to_vec(), radii.to_vec());
        let de = DerivativeEngine::dual();
        let rep = lift(if conformal != 0 {
            conformal_mass(&q, &de)
        } else {
            riemannian_mass_q(&q, &de)
        })?;
        *out_mass = rep.mass;
        *out_converged = rep.converged as c_int;
        Ok(())
    })
}

/// Pointwise Bochner residuals for a seeded random weighted 1-form, with the
/// Ricci term entering with `+` and with `−`.
///
/// # Safety
/// Pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn wa_bochner_residuals(
    w: *const WaWeyl,
    point: *const f64,
    point_len: size_t,
    weight: f64,
    alpha_seed: u64,
    out_plus: *mut f64,
    out_minus: *mut f64,
) -> WaStatus {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("handle"))?;
        let p = read_slice(point, point_len, "point")?;
        if p.len() != w.inner.model.dim() {
            return Err((WaStatus::WaConfig, format!("point needs {} coordinates", w.inner.model.dim())));
        }
        if out_plus.is_null() || out_minus.is_null() {
            return Err(null("output"));
        }
        let alpha = FormSpec::RandomTrig {
            seed: alpha_seed,
            degree: 1,
            amplitude: 1.0,
            fiber: false,
        };
        let wp = lift(w.inner.at(p, &DerivativeEngine::dual()))?;
        let t = lift(bochner_terms(&wp, &alpha, weight))?;
        *out_plus = t.pointwise_residual(1.0);
        *out_minus = t.pointwise_residual(-1.0);
        Ok(())
    })
}

/// Run the identity suite for a TOML configuration; `*out_pass` is 1 when
/// every identity passes. `json_out`, when not null, receives the reports as
/// a JSON array to be released with `wa_string_free`.
///
/// # Safety
/// `config_toml` must be NUL-terminated; output pointers valid or null.
#[no_mangle]
pub unsafe extern "C" fn wa_verify(
    config_toml: *const c_char,
    seed: u64,
    out_pass: *mut c_int,
    json_out: *mut *mut c_char,
) -> WaStatus {
    guard(|| {
        let text = read_str(config_toml, "config")?;
        if out_pass.is_null() {
            return Err(null("out_pass"));
        }
        let cfg = lift(RunConfig::from_toml(text).and_then(|c| {
            c.resolve(&Overrides {
                seed: Some(seed),
                ..Default::default()
            })
        }))?;
        let reports = lift(run_suite(&cfg.sampler(), &cfg.suite()))?;
        *out_pass = reports.iter().all(|r| r.pass) as c_int;
        if !json_out.is_null() {
            let s = lift(serde_json::to_string(&reports).map_err(Error::from))?;
            *json_out = CString::new(s).unwrap_or_default().into_raw();
        }
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 when there is none.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn wa_last_error(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let k = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
