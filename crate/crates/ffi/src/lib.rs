//! C ABI over `ordbreuil`.
//!
//! Objects are opaque heap handles released with their `_free` function.
//! Every fallible call returns an [`OrdbStatus`]; the message of the most
//! recent failure on the calling thread is available from
//! [`ordb_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ordbreuil::cli::{self, Format, Settings};
use ordbreuil::coeff::{Fq, PrimeCtx};
use ordbreuil::comparison::to_fl;
use ordbreuil::deformation::{tangent_dimension, TangentKind};
use ordbreuil::gauge::GaugeData;
use ordbreuil::monodromy::{monodromy_closed_form, monodromy_exists, OrdinaryModule};
use ordbreuil::Error;

/// Result codes shared by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Genericity = 3,
    NoMonodromy = 4,
    Assertion = 5,
    NoConvergence = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Which tangent space to measure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrdbTangent {
    Quasi = 0,
    WithMonodromy = 1,
}

/// Ordinary rank-three module with mod-p coefficients.
pub struct OrdbModule {
    inner: OrdinaryModule<Fq>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OrdbStatus {
    match e {
        Error::GenericityViolation(_) => OrdbStatus::Genericity,
        Error::NoMonodromy => OrdbStatus::NoMonodromy,
        Error::NoConvergence(_) => OrdbStatus::NoConvergence,
        Error::InvalidInput(_) | Error::NonUnit | Error::ContextMismatch | Error::WeightMismatch => {
            OrdbStatus::InvalidInput
        }
        _ => OrdbStatus::Assertion,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (OrdbStatus, String)>) -> OrdbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OrdbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            OrdbStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (OrdbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (OrdbStatus, String) {
    (OrdbStatus::NullPointer, "null pointer argument".into())
}

/// Copies the last error message of this thread into `buf` (NUL terminated).
/// Returns the full message length excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ordb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Returns 1 when `(p, a0, a1, a2)` satisfies the strong genericity bounds.
#[no_mangle]
pub extern "C" fn ordb_is_strongly_generic(p: u32, a0: u32, a1: u32, a2: u32) -> i32 {
    ordbreuil::coeff::check_strong_genericity(p, [a0, a1, a2]) as i32
}

/// Builds an ordinary module. `params` holds
/// `v10, v20, v20p, v21, alpha0, alpha1, alpha2` reduced mod `p`.
///
/// # Safety
/// `weights` must point to 3 values, `params` to 7, `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn ordb_module_new(
    p: u32,
    weights: *const u32,
    params: *const i64,
    out: *mut *mut OrdbModule,
) -> OrdbStatus {
    guard(|| {
        if weights.is_null() || params.is_null() || out.is_null() {
            return Err(null());
        }
        let w = std::slice::from_raw_parts(weights, 3);
        let v = std::slice::from_raw_parts(params, 7);
        let ctx = PrimeCtx::new(p, [w[0], w[1], w[2]]).map_err(lib_err)?;
        let f = |x: i64| Fq::new(x, p);
        let g = GaugeData { v10: f(v[0]), v20: f(v[1]), v20p: f(v[2]), v21: f(v[3]), lambda: [f(v[4]), f(v[5]), f(v[6])] };
        let inner = OrdinaryModule::new(ctx, g).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(OrdbModule { inner }));
        Ok(())
    })
}

/// Releases a module; null is ignored.
///
/// # Safety
/// `m` must come from [`ordb_module_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ordb_module_free(m: *mut OrdbModule) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Writes 1 to `out` when the module admits a monodromy operator.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ordb_monodromy_exists(m: *const OrdbModule, out: *mut i32) -> OrdbStatus {
    guard(|| {
        let (Some(m), false) = (m.as_ref(), out.is_null()) else { return Err(null()) };
        *out = monodromy_exists(&m.inner).map_err(lib_err)? as i32;
        Ok(())
    })
}

/// Writes the monodromy polynomials `P10, P21, P20` as three consecutive
/// blocks of `p` coefficients in powers of `u^e` (so `out` needs `3p` slots).
///
/// # Safety
/// `m` must be a live handle and `out` valid for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ordb_monodromy(m: *const OrdbModule, out: *mut u32, len: usize) -> OrdbStatus {
    guard(|| {
        let (Some(m), false) = (m.as_ref(), out.is_null()) else { return Err(null()) };
        let p = m.inner.ctx().p() as usize;
        if len < 3 * p {
            return Err((OrdbStatus::BufferTooSmall, format!("need {} slots", 3 * p)));
        }
        let nd = monodromy_closed_form(&m.inner).map_err(lib_err)?;
        let dst = std::slice::from_raw_parts_mut(out, 3 * p);
        for (block, poly) in [&nd.p10, &nd.p21, &nd.p20].into_iter().enumerate() {
            for k in 0..p {
                dst[block * p + k] = poly.coeff(k).value();
            }
        }
        Ok(())
    })
}

/// Writes the dimension of the requested tangent space.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ordb_tangent_dimension(m: *const OrdbModule, kind: OrdbTangent, out: *mut u32) -> OrdbStatus {
    guard(|| {
        let (Some(m), false) = (m.as_ref(), out.is_null()) else { return Err(null()) };
        let kind = match kind {
            OrdbTangent::Quasi => TangentKind::Quasi,
            OrdbTangent::WithMonodromy => TangentKind::WithMonodromy,
        };
        *out = tangent_dimension(kind, &m.inner).map_err(lib_err)? as u32;
        Ok(())
    })
}

/// Writes the Fontaine-Laffaille Frobenius row-major into `frob[9]` and the
/// Hodge-Tate weights into `weights[3]`.
///
/// # Safety
/// `m` must be a live handle; `frob` and `weights` valid for 9 and 3 values.
#[no_mangle]
pub unsafe extern "C" fn ordb_fl_module(m: *const OrdbModule, frob: *mut u32, weights: *mut u32) -> OrdbStatus {
    guard(|| {
        let (Some(m), false, false) = (m.as_ref(), frob.is_null(), weights.is_null()) else { return Err(null()) };
        let fl = to_fl(&m.inner).map_err(lib_err)?;
        let f = std::slice::from_raw_parts_mut(frob, 9);
        for i in 0..3 {
            for j in 0..3 {
                f[3 * i + j] = fl.frob[i][j].value();
            }
        }
        std::slice::from_raw_parts_mut(weights, 3).copy_from_slice(&fl.hodge_tate);
        Ok(())
    })
}

/// Runs a CLI command (`"gauge"`, `"monodromy"`, ...) on a JSON document and
/// returns the machine-format report through `out`, to be released with
/// [`ordb_string_free`]. A report is produced on failure too.
///
/// # Safety
/// `command` must be a NUL-terminated string, `input` null or NUL-terminated,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ordb_run_json(
    command: *const c_char,
    input: *const c_char,
    seed: u64,
    out: *mut *mut c_char,
) -> OrdbStatus {
    let mut report = None;
    let status = guard(|| {
        if command.is_null() || out.is_null() {
            return Err(null());
        }
        let name = CStr::from_ptr(command).to_str().map_err(|e| (OrdbStatus::InvalidInput, e.to_string()))?;
        let cmd = cli::parse_command(name).ok_or_else(|| (OrdbStatus::InvalidInput, format!("unknown command {name}")))?;
        let doc = if input.is_null() {
            None
        } else {
            let text = CStr::from_ptr(input).to_str().map_err(|e| (OrdbStatus::InvalidInput, e.to_string()))?;
            Some(cli::parse_document(text).map_err(|f| (OrdbStatus::InvalidInput, f.message))?)
        };
        let settings = Settings { precision: None, fil: None, seed: Some(seed), transcript: false };
        let outcome = cli::execute(cmd, doc.as_ref(), &settings);
        report = Some(cli::render(cmd, &outcome, Format::Machine));
        match outcome {
            Ok(_) => Ok(()),
            Err(f) => Err((
                match f.code {
                    cli::EXIT_INPUT => OrdbStatus::InvalidInput,
                    cli::EXIT_NO_CONVERGENCE => OrdbStatus::NoConvergence,
                    _ => OrdbStatus::Assertion,
                },
                f.message,
            )),
        }
    });
    if !out.is_null() {
        *out = report
            .and_then(|r| CString::new(r).ok())
            .map_or(std::ptr::null_mut(), CString::into_raw);
    }
    status
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ordb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
